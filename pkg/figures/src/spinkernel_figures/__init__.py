"""Figure scripts over spinkernel pipeline artifacts.

Every plotted number comes out of a pipeline CSV cell; these scripts do
no computation beyond axis transforms.  Inputs are validated against
the manifest's config hash and refused on mismatch.
"""

from .io import HashMismatch, SchemaError, load_manifest, read_csv, read_json
from .registry import FIGURES, render

__version__ = "0.1.0"
