from pydantic import BaseModel
from dotenv import load_dotenv
import os

load_dotenv()


class Settings(BaseModel):
    # Translation limits
    translator_state_cap: int = int(
        os.environ.get("SUPERVISOR_TRANSLATOR_STATE_CAP", "1000000")
    )

    # Lasso validation limits
    lasso_budget: int = int(os.environ.get("SUPERVISOR_LASSO_BUDGET", "2000000"))
    lasso_max_ap: int = int(os.environ.get("SUPERVISOR_LASSO_MAX_AP", "4"))

    # Simulation configuration
    max_steps: int = int(os.environ.get("SUPERVISOR_MAX_STEPS", "10000"))
    batch_workers: int = int(os.environ.get("SUPERVISOR_BATCH_WORKERS", "1"))

    # Supervised-language enumeration (test oracle)
    language_budget: int = int(os.environ.get("SUPERVISOR_LANGUAGE_BUDGET", "200000"))

    log_level: str = os.environ.get("SUPERVISOR_LOG_LEVEL", "WARNING")


settings = Settings()
