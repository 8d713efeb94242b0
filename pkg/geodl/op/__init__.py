from .run_incremental import RunIncremental
from .summarize import SummarizeRuns
