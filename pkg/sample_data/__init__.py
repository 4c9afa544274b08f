from pathlib import Path

SAMPLE_DIR = Path(__file__).parent


def sample_path(name: str) -> Path:
    return SAMPLE_DIR / name
