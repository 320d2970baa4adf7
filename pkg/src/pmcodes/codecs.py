"""One entry point for building any codec kind from its parameters."""

from __future__ import annotations

from typing import Sequence

from .code_core import Codec, CodeParams, derive_params
from .miser import MiserCodec
from .pm_mbr import MbrCodec
from .pm_msr import MsrCodec
from .systematizer import RemappedCodec


def codec_for(params: CodeParams, systematic_ids: Sequence[int] | None = None) -> Codec:
    """Default construction for ``params``.

    With ``systematic_ids``, MSR uses its native remap (solve ``Psi_k M = U``);
    MBR and MISER go through the generic generator-matrix remap.
    """
    if params.kind == "MSR":
        return MsrCodec(params, systematic_ids=systematic_ids)
    base = MbrCodec(params) if params.kind == "MBR" else MiserCodec(params)
    if systematic_ids is None:
        return base
    return RemappedCodec(base, systematic_ids)


def build_codec(kind: str, n: int, k: int, d: int, q: int | None = None,
                systematic_ids: Sequence[int] | None = None) -> Codec:
    return codec_for(derive_params(kind, n, k, d, q), systematic_ids)
