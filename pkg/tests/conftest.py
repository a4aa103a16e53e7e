import pathlib
import sys

# allow running the suite from a fresh checkout without installing
_src = pathlib.Path(__file__).resolve().parents[1] / "src"
try:
    import slithernav  # noqa: F401
except ImportError:
    sys.path.insert(0, str(_src))
