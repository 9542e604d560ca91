"""Self-dual Yang-Mills fields and their infinitesimal symmetries on truncated power series."""
from . import frames, gauge, hidden, jets, lie, manifest, riemann_hilbert, twistor

__all__ = ["frames", "gauge", "hidden", "jets", "lie", "manifest", "riemann_hilbert", "twistor"]
__version__ = "0.1.0"
