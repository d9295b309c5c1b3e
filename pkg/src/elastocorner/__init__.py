"""Corner scattering toolkit for the time-harmonic Navier equation.

Modules
-------
domain           media, densities, sectors, polygons, probe directions, sources
fourier_green    half-shift periodic Green functions and the spectral operator P
cgo              complex geometrical optics solutions
elastic_forward  Lippmann-Schwinger forward solver and far fields
corner_analysis  corner relations, sector moments, extraction and scans
cli              command-line entry point
"""
from .domain import (ConvexPolygon, DensityProfile, ElasticMedium, GeometryError, MediumError,
                     ProbeDirection, Sector, SourceModel, choose_probe_direction,
                     far_field_split, wavenumbers)

__all__ = ["ConvexPolygon", "DensityProfile", "ElasticMedium", "GeometryError", "MediumError",
           "ProbeDirection", "Sector", "SourceModel", "choose_probe_direction",
           "far_field_split", "wavenumbers"]

__version__ = "0.1.0"
