"""Seed mutation by model-guided subtree reassembly.

A random subtree of a random seed is pruned to a stub, then fragments are
appended one at a time at the first pre-order stub, each chosen uniformly
from the suggester's top-k after filtering to the stub's kind. The pre-order
discipline mirrors fragmentation exactly, so replaying the removed fragments
restores the seed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .estree import (
    AstNode,
    Stub,
    first_stub_path,
    has_stub,
    node_at_path,
    replace_at_path,
)
from .fragments import Fragment, Vocabulary, fragmentize, is_fragmentizable, materialize
from .suggest import Suggester


class NothingToRemove(Exception):
    """The AST has no removable (non-root) fragment."""


class NothingToAppend(Exception):
    """No stub remains to accept a fragment."""


class AppendTypeError(Exception):
    def __init__(self, expected: str, got: str):
        super().__init__(f"stub expects {expected}, got {got}")
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class GenerationParams:
    f_max: int = 100
    k_top: int = 64
    retry_bound: int | None = None  # defaults to 2 * k_top

    def __post_init__(self):
        if self.f_max < 1 or self.k_top < 1:
            raise ValueError("f_max and k_top must be >= 1")

    @property
    def retries(self) -> int:
        return self.retry_bound if self.retry_bound is not None else 2 * self.k_top


@dataclass
class RemovalResult:
    pruned: AstNode
    context: list[int]          # BOS plus ids of fragments before the cut
    stub_kind: str
    parent_id: int              # encoded id of the enclosing fragment
    position: int               # fragment index that was removed
    removed_ids: list[int]
    removed_fragments: list[Fragment]


def _fragment_paths(ast: AstNode) -> list[tuple]:
    """Paths of fragmentizable nodes in pre-order; parallels fragmentize."""
    paths: list[tuple] = []

    def visit(n: AstNode, path: tuple) -> None:
        if is_fragmentizable(n):
            paths.append(path)
        for si, ((sname, ar), v) in enumerate(zip(n.kind.slots, n.slots)):
            if isinstance(v, AstNode):
                visit(v, path + ((si, None),))
            elif isinstance(v, tuple):
                for li, item in enumerate(v):
                    if isinstance(item, AstNode):
                        visit(item, path + ((si, li),))

    visit(ast, ())
    return paths


def remove_subtree(ast: AstNode, vocab: Vocabulary,
                   rng: random.Random) -> RemovalResult:
    """Prune one uniformly random non-root subtree down to a stub."""
    seq = fragmentize(ast)
    if len(seq) < 2:
        raise NothingToRemove("seed has only its root fragment")
    enc = vocab.encode(seq)
    pos = rng.randrange(1, len(seq))
    paths = _fragment_paths(ast)
    path = paths[pos]
    target = node_at_path(ast, path)
    pruned = replace_at_path(ast, path, Stub(target.kind))
    width = len(fragmentize(target))
    return RemovalResult(
        pruned=pruned,
        context=enc.ids[:pos + 1],
        stub_kind=target.kind.name,
        parent_id=enc.parents[pos],
        position=pos,
        removed_ids=enc.ids[pos + 1:pos + 1 + width],
        removed_fragments=seq.fragments[pos:pos + width],
    )


def append_frag(ast: AstNode, frag: Fragment) -> AstNode:
    """Replace the first pre-order stub with the fragment."""
    path = first_stub_path(ast)
    if path is None:
        raise NothingToAppend("no stub in the AST")
    stub = node_at_path(ast, path)
    if stub.kind.name != frag.kind_name:
        raise AppendTypeError(stub.kind.name, frag.kind_name)
    return replace_at_path(ast, path, materialize(frag))


def is_ast_broken(ast: AstNode) -> bool:
    """True while kind-only stubs remain."""
    return has_stub(ast)


NO_TYPED_SUGGESTION = "no_typed_suggestion"
BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class MutationFailure:
    reason: str                 # NO_TYPED_SUGGESTION or BUDGET_EXHAUSTED
    seed_index: int
    appended: int


@dataclass
class MutationResult:
    ast: AstNode
    seed_index: int
    removal: RemovalResult
    appended_ids: list[int] = field(default_factory=list)
    appended_kinds: list[tuple[str, str]] = field(default_factory=list)  # (stub, fragment)


def _stub_kinds(frag: Fragment) -> list[str]:
    """Kinds of the fragment's stub slots in pre-order."""
    out = []
    for v in frag.root.slots:
        if isinstance(v, Stub):
            out.append(v.kind.name)
        elif isinstance(v, tuple):
            out.extend(item.kind.name for item in v if isinstance(item, Stub))
    return out


def mutate_ast(seeds: Sequence[AstNode], suggester: Suggester,
               params: GenerationParams, vocab: Vocabulary,
               rng: random.Random) -> MutationResult | MutationFailure:
    """One mutation attempt: prune a random seed, then rebuild model-guided."""
    seed_index = rng.randrange(len(seeds))
    removal = remove_subtree(seeds[seed_index], vocab, rng)
    working = removal.pruned
    context = list(removal.context)
    pending: deque[tuple[str, int]] = deque([(removal.stub_kind, removal.parent_id)])
    result = MutationResult(working, seed_index, removal)

    while pending:
        if len(result.appended_ids) >= params.f_max:
            return MutationFailure(BUDGET_EXHAUSTED, seed_index, len(result.appended_ids))
        need_kind, parent = pending[0]
        suggestions = suggester.suggest(context, need_kind, parent, params.k_top)
        if not any(vocab.kind_of(s.fragment_id) == need_kind for s in suggestions):
            return MutationFailure(NO_TYPED_SUGGESTION, seed_index, len(result.appended_ids))
        pick = None
        for _ in range(params.retries):
            cand = suggestions[rng.randrange(len(suggestions))]
            if vocab.kind_of(cand.fragment_id) == need_kind:
                pick = cand
                break
        if pick is None:
            return MutationFailure(BUDGET_EXHAUSTED, seed_index, len(result.appended_ids))
        frag = vocab.fragment_of(pick.fragment_id)
        working = append_frag(working, frag)
        pending.popleft()
        for kname in reversed(_stub_kinds(frag)):
            pending.appendleft((kname, pick.fragment_id))
        context.append(pick.fragment_id)
        result.appended_ids.append(pick.fragment_id)
        result.appended_kinds.append((need_kind, frag.kind_name))

    result.ast = working
    return result
