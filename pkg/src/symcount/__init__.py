"""Counting integral and S-integral points on level sets ``f(x) = m`` and
comparing the counts with real and p-adic invariant volumes."""

from .enumeration import (PlaceSet, SPoint, denominator_points, integral_points,
                          primitive_filter, s_points_by_level)
from .experiments import (Region, counting_experiment, denominator_experiment,
                          equidist_experiment, halfspace_pair, octant_partition,
                          well_rounded_check)
from .heights import HeightProfile, height, height_squared, padic_norm
from .varieties import VarietySpec, evaluate, gradient, radial_project
from .volumes_arch import (AsymptoticFit, VolumeEstimate, fit_power_log, hyperboloid_volume,
                           shell_integral, shell_volume, tail_integral, volume_grid)
from .volumes_padic import (DensityRecord, count_solutions, doubling_check, local_density,
                            multi_prime_ball_volume, padic_ball_volume, padic_sphere_series,
                            padic_sphere_volume, structure_fit)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFit", "DensityRecord", "HeightProfile", "PlaceSet", "Region", "SPoint",
    "VarietySpec", "VolumeEstimate", "count_solutions", "counting_experiment",
    "denominator_experiment", "denominator_points", "doubling_check", "equidist_experiment",
    "evaluate", "fit_power_log", "gradient", "halfspace_pair", "height", "height_squared",
    "hyperboloid_volume", "integral_points", "local_density", "multi_prime_ball_volume",
    "octant_partition", "padic_ball_volume", "padic_norm", "padic_sphere_series",
    "padic_sphere_volume", "primitive_filter", "radial_project", "s_points_by_level",
    "shell_integral", "shell_volume", "structure_fit", "tail_integral", "volume_grid",
    "well_rounded_check",
]
