"""Sky-map inpainting of sparse antenna signal-level measurements."""
from .grid import AngularGrid, InpaintingMask, PixelIndex, SignalField, neighbor
from .ingest import MeasurementRecord, bin_record, parse_records, power_to_dbm, rasterize
from .laplacian import LaplacianStencil, apply_laplacian, apply_system, assemble_dense
from .render import GreyscaleParams, to_greyscale, write_pgm, write_png
from .solver import SolveReport, SolverConfig, cg_solve, solve_reduced

__version__ = "0.1.0"
