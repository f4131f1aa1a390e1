"""Abstract contracts the core depends on (Ports)."""
from app.core.ports.denoiser import Denoiser, DenoiserQuery

__all__ = ["Denoiser", "DenoiserQuery"]
