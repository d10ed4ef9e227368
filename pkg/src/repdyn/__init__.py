"""repdyn: repeated-game strategy automata, exact Markov-chain payoffs under
implementation noise, and evolutionary dynamics (replicator, small-mutation
embedded chain, agent-based mutation-selection)."""

__version__ = "0.1.0"

from .game import (  # noqa: F401
    AXELROD,
    Action,
    GameParams,
    InvalidGameParams,
    effective_coop_prob,
    is_coordinated,
    outcome_index,
    payoff_of,
    validate,
)
from .strategy import (  # noqa: F401
    AdcoStrategy,
    AonStrategy,
    InfiniteMemoryStrategy,
    Memory1,
    StrategyAutomaton,
    UnknownStrategy,
    adco_transition,
    aon_transition,
    catalog,
    grim_automaton,
    lower_to_automaton,
    parse_spec,
    spec_of,
    zd_extortion,
)
from .payoff import (  # noqa: F401
    ChainTooLargeError,
    ConvergenceError,
    PairResult,
    PayoffMatrix,
    ProductChain,
    ReducibleChainError,
    adco_group_coop_rate,
    aon_group_coop_rate,
    aon_self_payoff,
    build_product_chain,
    chain_pair_payoff,
    group_coordination_prob,
    group_shared_state_chain,
    load_payoff_matrix,
    mem1_pair_payoffs_batch,
    pair_payoff,
    payoff_matrix,
    save_payoff_matrix,
    shared_state_machine,
    stationary,
)
from .mc import monte_carlo_group_coop_rate, monte_carlo_payoff  # noqa: F401
from .dynamics import (  # noqa: F401
    AgentSimResult,
    EmbeddedChain,
    FixedPointReport,
    ReplicatorTrajectory,
    SimConfig,
    agent_simulation,
    agent_simulation_replicates,
    cooperation_level,
    embedded_chain,
    fixation_matrix,
    fixation_probability,
    interior_fixed_point,
    replicator_step,
    replicator_trajectory,
)
from .experiments import (  # noqa: F401
    ConfigError,
    ExperimentConfig,
    ResultTable,
    build_mem1_grid,
    classics_roster,
    run,
    validation_checks,
)
