import os
import sys

_build_dir = os.environ.get("SQUIRRELS_PYTHON_DIR")
if _build_dir:
    sys.meta_path[:] = [f for f in sys.meta_path if "_editable_" not in type(f).__module__]
    sys.path.insert(0, _build_dir)
