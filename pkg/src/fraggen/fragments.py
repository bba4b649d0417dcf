"""Depth-one AST fragments: slicing, vocabulary, and reassembly.

A fragment is a node plus its immediate children, with each expandable child
replaced by a kind-only stub. A child whose slots are all absent cannot emit
a fragment of its own, so it is embedded in its parent's fragment whole;
this keeps slicing and reassembly exact inverses.
"""

from __future__ import annotations

import base64
import hashlib
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .estree import (
    ABSENT,
    Arity,
    AstNode,
    KIND_NAMES,
    RegexValue,
    Stub,
    first_stub_path,
    kind,
    node_at_path,
    replace_at_path,
)


class EmptyCorpus(Exception):
    """Vocabulary construction needs at least one fragment sequence."""


class ReassemblyTypeError(Exception):
    def __init__(self, position: int, expected: str, got: str):
        super().__init__(f"fragment {position}: stub expects {expected}, got {got}")
        self.position = position


class ReassemblyArityError(Exception):
    """Fragments and stubs did not pair off exactly."""


@dataclass(frozen=True)
class Fragment:
    """Depth-one subtree; expandable children appear as stubs."""

    root: AstNode

    @property
    def kind_name(self) -> str:
        return self.root.kind.name


@dataclass
class FragmentSequence:
    """Pre-order fragment list for one source file."""

    fragments: list[Fragment]
    parents: list[int]  # index of the enclosing fragment, -1 for the root
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.fragments)


def is_fragmentizable(n: AstNode) -> bool:
    """True when the node occupies at least one slot."""
    return any(v is not ABSENT for v in n.slots)


def _fragment_of(n: AstNode) -> Fragment:
    slots = []
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if ar is Arity.ONE or ar is Arity.OPT:
            if isinstance(v, AstNode):
                slots.append(Stub(v.kind) if is_fragmentizable(v) else v)
            else:
                slots.append(v)
        elif ar is Arity.LIST:
            slots.append(tuple(Stub(item.kind) if is_fragmentizable(item) else item
                               for item in v))
        else:
            slots.append(v)
    return Fragment(AstNode(n.kind, tuple(slots)))


def fragmentize(ast: AstNode, provenance: str = "") -> FragmentSequence:
    """Slice a normalized AST into its pre-order fragment sequence."""
    fragments: list[Fragment] = []
    parents: list[int] = []

    def visit(n: AstNode, parent_pos: int) -> None:
        pos = parent_pos
        if is_fragmentizable(n):
            pos = len(fragments)
            fragments.append(_fragment_of(n))
            parents.append(parent_pos)
        for (sname, ar), v in zip(n.kind.slots, n.slots):
            if ar is Arity.ONE or ar is Arity.OPT:
                if isinstance(v, AstNode):
                    visit(v, pos)
            elif ar is Arity.LIST:
                for item in v:
                    visit(item, pos)

    visit(ast, -1)
    return FragmentSequence(fragments, parents, provenance)


def _ser(v: Any, out: list[bytes]) -> None:
    if v is ABSENT:
        out.append(b"A")
    elif isinstance(v, Stub):
        out.append(b"S")
        _ser_str(v.kind.name, out)
    elif isinstance(v, AstNode):
        out.append(b"N")
        _ser_str(v.kind.name, out)
        for slot in v.slots:
            _ser(slot, out)
    elif isinstance(v, tuple):
        out.append(b"L" + str(len(v)).encode() + b":")
        for item in v:
            _ser(item, out)
    elif isinstance(v, bool):
        out.append(b"b1" if v else b"b0")
    elif v is None:
        out.append(b"z")
    elif isinstance(v, int):
        out.append(b"i")
        _ser_str(str(v), out)
    elif isinstance(v, float):
        out.append(b"f")
        _ser_str(repr(v), out)
    elif isinstance(v, str):
        out.append(b"s")
        _ser_str(v, out)
    elif isinstance(v, RegexValue):
        out.append(b"r")
        _ser_str(v.pattern, out)
        _ser_str(v.flags, out)
    else:
        raise TypeError(f"unserializable slot value {v!r}")


def _ser_str(s: str, out: list[bytes]) -> None:
    payload = s.encode("utf-8")
    out.append(str(len(payload)).encode() + b":" + payload)


def canonical_key(frag: Fragment) -> bytes:
    """Platform-stable byte key; equal exactly for structurally equal fragments."""
    out: list[bytes] = []
    _ser(frag.root, out)
    return b"".join(out)


BOS_KIND = "⟨BOS⟩"


@dataclass
class VocabEntry:
    id: int
    kind_name: str
    freq: int
    reserved: str | None  # None | "bos" | "oov"
    key: bytes | None
    fragment: Fragment | None


@dataclass
class EncodedSequence:
    ids: list[int]          # BOS first
    parents: list[int]      # encoded parent id per fragment, aligned to ids[1:]
    provenance: str = ""


class Vocabulary:
    """Deduplicated fragment table with typed out-of-vocabulary entries."""

    def __init__(self, entries: list[VocabEntry]):
        self.entries = entries
        self._by_key = {e.key: e.id for e in entries if e.key is not None}
        self._oov = {e.kind_name: e.id for e in entries if e.reserved == "oov"}
        self.bos_id = next(e.id for e in entries if e.reserved == "bos")
        self.type_index: dict[str, tuple[int, ...]] = {}
        for e in entries:
            if e.reserved is None:
                self.type_index.setdefault(e.kind_name, ())
                self.type_index[e.kind_name] += (e.id,)

    def __len__(self) -> int:
        return len(self.entries)

    def oov_id(self, kind_name: str) -> int:
        return self._oov[kind_name]

    def id_of_key(self, key: bytes) -> int | None:
        return self._by_key.get(key)

    def kind_of(self, fid: int) -> str:
        return self.entries[fid].kind_name

    def fragment_of(self, fid: int) -> Fragment:
        frag = self.entries[fid].fragment
        if frag is None:
            raise KeyError(f"id {fid} is reserved and has no fragment")
        return frag

    def is_reserved(self, fid: int) -> bool:
        return self.entries[fid].reserved is not None

    def non_reserved_ids(self) -> list[int]:
        return [e.id for e in self.entries if e.reserved is None]

    def type_set(self, kind_name: str) -> tuple[int, ...]:
        return self.type_index.get(kind_name, ())

    def encode(self, seq: FragmentSequence) -> EncodedSequence:
        ids = [self.bos_id]
        for frag in seq.fragments:
            fid = self.id_of_key(canonical_key(frag))
            ids.append(self.oov_id(frag.kind_name) if fid is None else fid)
        parents = [self.bos_id if p < 0 else ids[p + 1] for p in seq.parents]
        return EncodedSequence(ids, parents, seq.provenance)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for e in self.entries:
            h.update(str(e.id).encode())
            h.update(e.kind_name.encode())
            h.update(str(e.freq).encode())
            h.update(e.key or b"-")
        return h.hexdigest()


def build_vocabulary(sequences: Iterable[FragmentSequence], min_freq: int = 5,
                     ) -> tuple[Vocabulary, list[EncodedSequence]]:
    """Deduplicate fragments, apply the OoV frequency rule, encode sequences."""
    sequences = list(sequences)
    if not sequences:
        raise EmptyCorpus("no fragment sequences")
    counts: Counter[bytes] = Counter()
    sample: dict[bytes, Fragment] = {}
    for seq in sequences:
        for frag in seq.fragments:
            key = canonical_key(frag)
            counts[key] += 1
            if key not in sample:
                sample[key] = frag

    entries: list[VocabEntry] = [VocabEntry(0, BOS_KIND, 0, "bos", None, None)]
    for kname in KIND_NAMES:
        entries.append(VocabEntry(len(entries), kname, 0, "oov", None, None))
    kept = sorted((key for key, c in counts.items() if c >= min_freq),
                  key=lambda key: (-counts[key], key))
    for key in kept:
        frag = sample[key]
        entries.append(VocabEntry(len(entries), frag.kind_name, counts[key],
                                  None, key, frag))
    vocab = Vocabulary(entries)
    return vocab, [vocab.encode(seq) for seq in sequences]


def materialize(frag: Fragment) -> AstNode:
    """The fragment as a working tree node; stub slots await expansion."""
    return frag.root


def reassemble(seq: FragmentSequence | list[Fragment]) -> AstNode:
    """Rebuild an AST by attaching each fragment at the first pre-order stub."""
    fragments = seq.fragments if isinstance(seq, FragmentSequence) else seq
    if not fragments:
        raise ReassemblyArityError("empty fragment sequence")
    tree = materialize(fragments[0])
    for i, frag in enumerate(fragments[1:], start=1):
        path = first_stub_path(tree)
        if path is None:
            raise ReassemblyArityError(f"no stub left for fragment {i}")
        stub = node_at_path(tree, path)
        if stub.kind.name != frag.kind_name:
            raise ReassemblyTypeError(i, stub.kind.name, frag.kind_name)
        tree = replace_at_path(tree, path, materialize(frag))
    if first_stub_path(tree) is not None:
        raise ReassemblyArityError("stubs left after final fragment")
    return tree


# --- on-disk store ---------------------------------------------------------

def _frag_to_obj(v: Any) -> Any:
    if isinstance(v, Stub):
        return {"__stub__": v.kind.name}
    if isinstance(v, AstNode):
        out: dict[str, Any] = {"type": v.kind.name}
        for (sname, ar), sv in zip(v.kind.slots, v.slots):
            if sv is ABSENT:
                continue
            if ar is Arity.LIST:
                out[sname] = [_frag_to_obj(item) for item in sv]
            elif isinstance(sv, RegexValue):
                out[sname] = {"__regex__": [sv.pattern, sv.flags]}
            elif isinstance(sv, (AstNode, Stub)):
                out[sname] = _frag_to_obj(sv)
            else:
                out[sname] = sv
        return out
    return v


def _obj_to_slot(v: Any) -> Any:
    if isinstance(v, dict):
        if "__stub__" in v:
            return Stub(kind(v["__stub__"]))
        if "__regex__" in v:
            return RegexValue(*v["__regex__"])
        return _obj_to_node(v)
    return v


def _obj_to_node(obj: dict) -> AstNode:
    k = kind(obj["type"])
    slots = []
    for sname, ar in k.slots:
        if sname not in obj:
            slots.append(() if ar is Arity.LIST else ABSENT)
        elif ar is Arity.LIST:
            slots.append(tuple(_obj_to_slot(item) for item in obj[sname]))
        else:
            slots.append(_obj_to_slot(obj[sname]))
    return AstNode(k, tuple(slots))


def save_store(directory: str | Path, vocab: Vocabulary,
               sequences: list[EncodedSequence]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "vocab.jsonl", "w", encoding="utf-8") as fh:
        for e in vocab.entries:
            row = {"id": e.id, "kind": e.kind_name, "freq": e.freq}
            if e.reserved:
                row["reserved"] = e.reserved
            else:
                row["key"] = base64.b64encode(e.key).decode("ascii")
                row["fragment"] = _frag_to_obj(e.fragment.root)
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
    with open(directory / "sequences.jsonl", "w", encoding="utf-8") as fh:
        for s in sequences:
            fh.write(json.dumps({"provenance": s.provenance, "ids": s.ids,
                                 "parents": s.parents},
                                separators=(",", ":")) + "\n")


def load_store(directory: str | Path) -> tuple[Vocabulary, list[EncodedSequence]]:
    directory = Path(directory)
    entries: list[VocabEntry] = []
    with open(directory / "vocab.jsonl", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if row.get("reserved"):
                entries.append(VocabEntry(row["id"], row["kind"], row["freq"],
                                          row["reserved"], None, None))
            else:
                entries.append(VocabEntry(
                    row["id"], row["kind"], row["freq"], None,
                    base64.b64decode(row["key"]),
                    Fragment(_obj_to_node(row["fragment"]))))
    vocab = Vocabulary(entries)
    sequences = []
    with open(directory / "sequences.jsonl", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            sequences.append(EncodedSequence(row["ids"], row["parents"],
                                             row.get("provenance", "")))
    return vocab, sequences
