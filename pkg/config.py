import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

DATA_DIR = Path(__file__).parent / "data"


class Settings:
    """Application settings"""

    def __init__(self):
        # Braid group defaults
        self.braid_index = int(os.getenv("BRAIDLAB_BRAID_INDEX", "4"))

        # Resource budgets
        self.cell_budget = int(os.getenv("BRAIDLAB_CELL_BUDGET", "2000000"))
        self.rewrite_budget = int(os.getenv("BRAIDLAB_REWRITE_BUDGET", "1000000"))
        self.search_budget = int(os.getenv("BRAIDLAB_SEARCH_BUDGET", "200000"))
        self.triple_budget = int(os.getenv("BRAIDLAB_TRIPLE_BUDGET", "100000"))
        self.check_seconds = float(os.getenv("BRAIDLAB_CHECK_SECONDS", "300"))

        # Rewriting
        self.shortcut = os.getenv("BRAIDLAB_SHORTCUT", "true").lower() == "true"

        # Randomized property tests
        self.seed = int(os.getenv("BRAIDLAB_SEED", "0"))

        # Paths
        self.patterns_file = os.getenv("BRAIDLAB_PATTERNS_FILE", str(DATA_DIR / "patterns.txt"))
        self.corpus_path = os.getenv("BRAIDLAB_CORPUS_PATH", str(DATA_DIR / "corpus"))
        self.expected_file = os.getenv("BRAIDLAB_EXPECTED_FILE", str(DATA_DIR / "expected.json"))

        # Logging
        self.log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        self.log_dir = os.getenv("LOG_DIR") or None


settings = Settings()
