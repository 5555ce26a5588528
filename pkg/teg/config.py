import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()  # loads .env for local runs

@dataclass(frozen=True)
class Settings:
    # Evaluation / audit / grid fan-out
    threads: int = max(1, int(os.getenv("TEG_THREADS", "4")))

    # Logging
    log_level: str = os.getenv("TEG_LOG_LEVEL", "INFO").upper()
    trace_enabled: bool = os.getenv("TEG_TRACE", "1") not in ("0", "false", "False", "")

    # Outputs
    output_dir: str = os.getenv("TEG_OUTPUT_DIR", "runs")

    # Numerics
    dtype: str = os.getenv("TEG_DTYPE", "float64")

settings = Settings()
