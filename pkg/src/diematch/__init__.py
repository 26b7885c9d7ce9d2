"""diematch: registration, same-die scoring, and clustering of 3D coin scans."""

__version__ = "0.1.0"
