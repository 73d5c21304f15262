from .config import (
    GenerationConfig,
    attribute_probabilities,
    iteration_rng,
    sample_attributes,
)
from .loop import (
    positive_schedule,
    read_candidates,
    run_generation_loop,
    run_iteration,
    write_candidates,
)
from .steps import (
    HardNegativeBatch,
    RewriteResult,
    generate_characters,
    generate_hard_negatives,
    generate_query,
    generate_scenario,
    rewrite_query,
    token_jaccard,
)
