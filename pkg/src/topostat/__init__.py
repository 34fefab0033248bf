"""Topological hypothesis testing: persistent homology of point clouds and
binary images, persistence-image vectorization, diagram distances, and a
two-stage element-wise test with FDR control."""

from .cubical import BinaryVolume, build_cubical, sedt
from .diagram import PersistenceDiagram, betti_at
from .distances import (PairwiseDistanceCache, bottleneck, joint_loss,
                        wasserstein)
from .errors import (DegenerateVolumeError, InvalidCapError,
                     InvalidFiltrationError, InvalidInputError,
                     InvalidLabelsError, InvalidPersistenceError,
                     TopostatError)
from .filtration import Filtration
from .images import (GridSpec, PersistenceImage, binning_vectorize,
                     corner_mask, persistence_image, pooled_grid,
                     transform_diagram, weight_value)
from .reduction import compute_persistence
from .rips import PointCloud, build_rips
from .simulate import (RockSpec, ShapeSpec, power_experiment, pseudo_rock,
                       sample_shape, scenario_experiment, subregions)
from .testing import (FilterConfig, LabeledImageCollection, TestResultGrid,
                      bh_adjust, filter_statistics, permutation_test,
                      pooled_t, storey_qvalues, two_stage_test)

__version__ = "0.1.0"
