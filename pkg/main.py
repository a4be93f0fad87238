import sys
from pathlib import Path

# Add the repository root to the path so `src` and `config` import when run as a script
sys.path.insert(0, str(Path(__file__).parent))

from src.api.commands import run


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
