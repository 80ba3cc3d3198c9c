"""Multi-tenant entity-relationship catalog service.

Catalogs hold an evolvable relational model plus tabular content, exposed
over HTTP through a URL query language with optimistic concurrency and
catalog-level access control.
"""

__version__ = "0.1.0"

from .registry import ClientContext, Registry  # noqa: F401
from .service import Config, Service  # noqa: F401
