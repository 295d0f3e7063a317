from .bundle import ModelBundle
from .gctsg import (
    LevelConflictError,
    LevelMeasurement,
    RefinementJob,
    RefinementResult,
    choose_level,
    generate_unconditional,
    measure_level,
    measure_level_batch,
    refine,
)
