"""Python bindings for the coact hybrid GUI/code agent runtime."""

import os
import sys

# During development the extension lives in the CMake build tree; installed
# wheels place it next to this file. COACT_EXT_DIR points at the build tree.
_ext_dir = os.environ.get("COACT_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from _coactpp import (  # noqa: F401
        SimDesktop,
        analyze,
        evaluate,
        extract_code_blocks,
        interaction_bound,
        md5_hex,
        parse_gui_action,
        replay,
        run_task,
    )
except ImportError:
    from coactpp._coactpp import (  # noqa: F401
        SimDesktop,
        analyze,
        evaluate,
        extract_code_blocks,
        interaction_bound,
        md5_hex,
        parse_gui_action,
        replay,
        run_task,
    )

__all__ = [
    "SimDesktop",
    "analyze",
    "evaluate",
    "extract_code_blocks",
    "interaction_bound",
    "md5_hex",
    "parse_gui_action",
    "replay",
    "run_task",
]
