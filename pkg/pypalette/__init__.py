from pypalette.classes.colouring import PairColouring, SatisfactionCertificate
from pypalette.classes.config import AuditConfig, AuditMode, PaletteSolverConfig, SatisfactionBudget, SolverConfig
from pypalette.classes.exceptions import PyPaletteException
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.palette import Palette
from pypalette.classes.weighting import StarMode, Weighting
from pypalette.lib.construction import audit_density, audit_induced_density, generate_construction
from pypalette.lib.lagrangian import lagrangian
from pypalette.lib.palette_lagrangian import build_pt, palette_lagrangian
from pypalette.lib.satisfaction import almost_satisfies_distance, satisfies
