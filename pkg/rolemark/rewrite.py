"""Span patches over method text: role prefixing, its inverse, noise renaming."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .base import (
    GENERIC_VAR_PREFIX,
    MASK64,
    SPLITMIX_GAMMA,
    SPLITMIX_MUL1,
    SPLITMIX_MUL2,
    PatchOverlapError,
    RenamedBinding,
    Role,
    Span,
)
from .binding import Binding, SymbolTable, resolve
from .roles import RoleReport, detect_roles
from .syntax import parse_method

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Patch:
    span: Span
    replacement: str


def apply_patches(source: str, patches: Iterable[Patch]) -> str:
    """Replace each patch span; text outside the spans is copied unchanged."""
    ordered = sorted(patches, key=lambda patch: (patch.span.start, patch.span.end))
    pieces: List[str] = []
    cursor = 0
    previous: Optional[Patch] = None
    for patch in ordered:
        start, end = patch.span
        if not 0 <= start <= end <= len(source):
            raise ValueError(f"Patch span {tuple(patch.span)} is outside the source (length {len(source)}).")
        if previous is not None and start < previous.span.end:
            raise PatchOverlapError(
                f"Patch {tuple(patch.span)} overlaps patch {tuple(previous.span)}."
            )
        pieces.append(source[cursor:start])
        pieces.append(patch.replacement)
        cursor = end
        previous = patch
    pieces.append(source[cursor:])
    return "".join(pieces)


def rename_patches(table: SymbolTable, binding: Binding, new_name: str) -> List[Patch]:
    return [Patch(span, new_name) for span in table.occurrences[binding.id]]


class SkipReason(str, Enum):
    NAME_COLLISION = "name-collision"
    NON_RENAMEABLE_OPAQUE = "non-renameable-opaque"


@dataclass(frozen=True)
class SkippedBinding:
    binding_id: int
    reason: SkipReason

    def as_dict(self) -> Dict[str, object]:
        return {"binding": self.binding_id, "reason": self.reason.value}


@dataclass(frozen=True)
class AugmentResult:
    source: str
    renamed_bindings: Tuple[RenamedBinding, ...]
    skipped: Tuple[SkippedBinding, ...]

    @property
    def changed(self) -> bool:
        return bool(self.renamed_bindings)


@dataclass(frozen=True)
class TransformResult:
    source: str
    renamed: Optional[RenamedBinding]
    seed_used: int


def augment(
    source: str,
    report: RoleReport,
    table: SymbolTable,
    *,
    name_based: bool = False,
) -> AugmentResult:
    """Prefix every occurrence of each role-carrying binding with its role.

    A binding is skipped when it is used inside an opaque region, or when the
    prefixed name already appears anywhere in the method. With ``name_based``
    every binding spelled like an accepted role binding gets the same prefix,
    which is the literal textual reading of role prefixing.
    """
    patches: List[Patch] = []
    renamed: List[RenamedBinding] = []
    skipped: List[SkippedBinding] = []
    name_roles: Dict[str, Role] = {}
    role_ids: Set[int] = set()

    for item in report.assignments:
        binding = table.binding(item.binding_id)
        new_name = item.role.prefix + binding.name
        if not binding.renameable or (
            name_based and not all(other.renameable for other in table.bindings_named(binding.name))
        ):
            skipped.append(SkippedBinding(binding.id, SkipReason.NON_RENAMEABLE_OPAQUE))
            continue
        if new_name in table.identifier_names:
            logger.debug("skipping %r: %r already used in the method", binding.name, new_name)
            skipped.append(SkippedBinding(binding.id, SkipReason.NAME_COLLISION))
            continue
        if name_based:
            name_roles.setdefault(binding.name, item.role)
            role_ids.add(binding.id)
            continue
        patches.extend(rename_patches(table, binding, new_name))
        renamed.append(RenamedBinding(binding.id, binding.name, new_name))

    if name_based:
        for binding in table.bindings:
            role = name_roles.get(binding.name)
            if role is None:
                continue
            new_name = role.prefix + binding.name
            patches.extend(rename_patches(table, binding, new_name))
            renamed.append(
                RenamedBinding(
                    binding.id,
                    binding.name,
                    new_name,
                    name_based_extra=binding.id not in role_ids,
                )
            )

    if not patches:
        return AugmentResult(source=source, renamed_bindings=(), skipped=tuple(skipped))
    return AugmentResult(
        source=apply_patches(source, patches),
        renamed_bindings=tuple(sorted(renamed, key=lambda item: item.binding_id)),
        skipped=tuple(skipped),
    )


def _visible(table: SymbolTable, binding: Binding, name: str) -> bool:
    if name in table.free_names:
        return True
    return any(
        other.name == name and other.scope_span.overlaps(binding.scope_span)
        for other in table.bindings
    )


def strip_roles(source: str, renamed: Optional[Sequence[RenamedBinding]] = None) -> str:
    """Undo :func:`augment`.

    With the ``renamed`` sidecar the inverse is exact: each listed binding goes
    back to its old name. Without it, role bindings whose names carry their
    role prefix lose one prefix, which leaves user variables that merely look
    prefixed alone. Raises :class:`ParseFailure` when the source does not parse.
    """
    tree = parse_method(source).unwrap()
    table = resolve(tree)
    patches: List[Patch] = []

    if renamed is not None:
        for item in renamed:
            binding = table.binding(item.binding_id)
            if binding.name != item.new_name:
                raise ValueError(
                    f"Binding {item.binding_id} is named {binding.name!r}, expected {item.new_name!r}."
                )
            patches.extend(rename_patches(table, binding, item.old_name))
        return apply_patches(source, patches)

    report = detect_roles(tree, table)
    for item in report.assignments:
        binding = table.binding(item.binding_id)
        prefix = item.role.prefix
        if not binding.renameable or not binding.name.startswith(prefix):
            continue
        old_name = binding.name[len(prefix):]
        if not old_name:
            continue
        if _visible(table, binding, old_name):
            logger.warning(
                "ambiguous strip: %r would collide with an existing %r; left as is",
                binding.name,
                old_name,
            )
            continue
        patches.extend(rename_patches(table, binding, old_name))
    return apply_patches(source, patches)


def splitmix64(state: int) -> Tuple[int, int]:
    """Advance a splitmix64 generator; returns ``(next_state, output)``."""
    state = (state + SPLITMIX_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL2) & MASK64
    return state, z ^ (z >> 31)


def stable_hash(text: str) -> int:
    """64-bit hash that is the same on every platform and Python run."""
    digest = hashlib.blake2b(text.encode("utf-8", errors="surrogateescape"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def mix_seed(global_seed: int, key: str) -> int:
    return (global_seed ^ stable_hash(key)) & MASK64


def fresh_generic_name(taken: Iterable[str]) -> str:
    names = set(taken)
    index = 0
    while f"{GENERIC_VAR_PREFIX}{index}" in names:
        index += 1
    return f"{GENERIC_VAR_PREFIX}{index}"


def transform_rename(
    source: str,
    table: SymbolTable,
    method_id: str,
    global_seed: int,
    *,
    salt: str = "",
) -> TransformResult:
    """Rename one seeded-random renameable binding to the first fresh ``varN``.

    The pick depends only on the method id, the global seed and the positional
    order of candidates, so a method and its role-augmented twin rename the
    same binding.
    """
    seed = mix_seed(global_seed, method_id + salt)
    candidates = table.renameable_bindings()
    if not candidates:
        return TransformResult(source=source, renamed=None, seed_used=seed)
    _state, output = splitmix64(seed)
    chosen = candidates[output % len(candidates)]
    new_name = fresh_generic_name(table.identifier_names)
    patched = apply_patches(source, rename_patches(table, chosen, new_name))
    return TransformResult(
        source=patched,
        renamed=RenamedBinding(chosen.id, chosen.name, new_name),
        seed_used=seed,
    )


__all__ = [
    "Patch",
    "apply_patches",
    "rename_patches",
    "SkipReason",
    "SkippedBinding",
    "AugmentResult",
    "TransformResult",
    "augment",
    "strip_roles",
    "splitmix64",
    "stable_hash",
    "mix_seed",
    "fresh_generic_name",
    "transform_rename",
]
