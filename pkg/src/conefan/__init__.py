"""conefan: polyhedral fans and toric / quasi-toric differential inclusions.

Cones, complete fans, inclusion right-hand sides, well-definedness
certificates, the embedding constructions and a reaction-network front-end,
from Python or your terminal.
"""

__version__ = "0.1.0"
