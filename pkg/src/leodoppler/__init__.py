"""Doppler and differential-Doppler statistics for LEO downlinks over spherical-cap cells."""
from .angle_dist import CellGeometry, NumericOptions, central_angle_cdf, central_angle_pdf, ups_min_cdf, ups_min_pdf
from .constants import SystemConstants, make_constants
from .differential import ClusterPlan, common_doppler, diff_doppler_cdf, diff_doppler_pdf, max_diff_doppler, plan_clusters
from .doppler import doppler_magnitude
from .doppler_dist import doppler_cdf_approx, doppler_cdf_exact, doppler_cdf_upper_bound, doppler_pdf

__version__ = "0.1.0"
