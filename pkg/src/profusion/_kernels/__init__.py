"""Table kernel backend selection.

Imports the compiled Cython kernels when available, falling back to the
pure numpy twins.  Set PROFUSION_PURE=1 to force the fallback.
"""

import os

if os.environ.get("PROFUSION_PURE"):
    from ._pure import (  # noqa: F401
        BACKEND,
        closure,
        conjugate_members,
        element_orders,
        filter_centralizing,
        filter_conjugation,
    )
else:
    try:
        from ._core import (  # noqa: F401
            BACKEND,
            closure,
            conjugate_members,
            element_orders,
            filter_centralizing,
            filter_conjugation,
        )
    except ImportError:
        from ._pure import (  # noqa: F401
            BACKEND,
            closure,
            conjugate_members,
            element_orders,
            filter_centralizing,
            filter_conjugation,
        )
