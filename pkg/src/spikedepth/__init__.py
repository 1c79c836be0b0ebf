"""Statistical depth for spike trains: median, outliers and DD classification."""
from .core import UNIT, SpikeTrain, TimeDomain, TrainSample, isi_vector
from .ddclass import (BoundaryFunction, ClassifierConfig, ClassifierSet, OptimizerConfig,
                      dd_plot, misclassification_rate, train_boundary)
from .depth import CardinalityModel, DepthConfig, DepthScore, depth, sample_depths
from .intensity import (Constant, Curve, Hawkes, IMIGrid, cumulative, estimate_intensity_imi,
                        estimate_intensity_kernel, inverse_cumulative, time_rescale)
from .median import MedianResult, estimate_median
from .metric import d_mu
from .outlier import OutlierReport, ThresholdCache, detect_outliers
from .simulate import sample, sample_hawkes, sample_hpp, sample_ipp

__version__ = "0.1.0"
