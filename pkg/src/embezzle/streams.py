"""Sorted block streams and streaming k-way merges.

A *block source* is an iterator yielding ``(values, counts)`` pairs where
``values`` is a non-increasing float64 array and ``counts`` is either an
int64 array of run multiplicities or ``None`` (every run has multiplicity
one).  Values must stay non-increasing across block boundaries; sources
violating this are rejected, which is the safety net behind the
construction-time monotonicity contract of the spectrum generators.

``merge_sorted`` lazily merges any number of such sources into a single
non-increasing stream, loading at most a bounded window per source.  It
never materializes the merged sequence: chunks are produced by cutting all
sources at a common value threshold and sorting only the safe prefix, so
memory stays O(sources * block) regardless of the merged length.
"""

from __future__ import annotations

from collections import deque
from typing import Iterator, Optional

import numpy as np

Block = tuple[np.ndarray, Optional[np.ndarray]]

BLOCK_ELEMS = 1 << 20


class StreamExhausted(RuntimeError):
    """A merge ran out of input before producing the requested length."""


class SpectrumOrderError(ValueError):
    """A source produced values that are not positive and non-increasing."""


def block_element_count(block: Block) -> int:
    values, counts = block
    if counts is None:
        return values.shape[0]
    return int(counts.sum())


def _split_block(block: Block, keep: int) -> Block:
    """First ``keep`` elements of a block, splitting a straddling run."""
    values, counts = block
    if counts is None:
        return values[:keep], None
    cum = np.cumsum(counts)
    idx = int(np.searchsorted(cum, keep, side="left"))
    out_vals = values[: idx + 1].copy()
    out_counts = counts[: idx + 1].copy()
    out_counts[idx] = keep - (int(cum[idx - 1]) if idx > 0 else 0)
    return out_vals, out_counts


class RunCursor:
    """Buffered, element-addressed view over a block source."""

    def __init__(self, source: Iterator[Block]):
        self._source = source
        self._bufs: deque[Block] = deque()
        self._buffered = 0
        self._done = False
        self._last_value: float | None = None

    @property
    def done(self) -> bool:
        return self._done

    @property
    def buffered(self) -> int:
        return self._buffered

    def _load_one(self) -> bool:
        try:
            values, counts = next(self._source)
        except StopIteration:
            self._done = True
            return False
        if values.shape[0] == 0:
            return True
        if values[-1] <= 0.0:
            raise SpectrumOrderError("spectrum values must be strictly positive")
        if values.shape[0] > 1 and not np.all(values[1:] <= values[:-1]):
            raise SpectrumOrderError("spectrum values must be non-increasing")
        if self._last_value is not None and values[0] > self._last_value:
            raise SpectrumOrderError(
                "spectrum values must be non-increasing across blocks"
            )
        self._last_value = float(values[-1])
        self._bufs.append((values, counts))
        self._buffered += block_element_count((values, counts))
        return True

    def ensure(self, min_elems: int) -> None:
        while not self._done and self._buffered < min_elems:
            self._load_one()

    def tail_value(self) -> float:
        """Smallest currently loaded value (-inf when nothing is buffered)."""
        if not self._bufs:
            return -np.inf
        return float(self._bufs[-1][0][-1])

    def pop_ge(self, threshold: float) -> list[Block]:
        """Consume and return every buffered element with value >= threshold."""
        out: list[Block] = []
        while self._bufs:
            values, counts = self._bufs[0]
            if values[-1] >= threshold:
                out.append((values, counts))
                self._buffered -= block_element_count((values, counts))
                self._bufs.popleft()
                continue
            # partial: values are descending, count entries >= threshold
            idx = int(np.searchsorted(-values, -threshold, side="right"))
            if idx > 0:
                head = (values[:idx], None if counts is None else counts[:idx])
                out.append(head)
                self._bufs[0] = (values[idx:], None if counts is None else counts[idx:])
                self._buffered -= block_element_count(head)
            break
        return out

    def take(self, n_elems: int) -> Block:
        """Consume exactly ``n_elems`` elements, concatenated into one block."""
        self.ensure(n_elems)
        if self._buffered < n_elems:
            raise StreamExhausted(
                f"requested {n_elems} elements, source holds {self._buffered}"
            )
        vals: list[np.ndarray] = []
        cnts: list[np.ndarray | None] = []
        got = 0
        while got < n_elems:
            values, counts = self._bufs[0]
            size = block_element_count((values, counts))
            need = n_elems - got
            if size <= need:
                vals.append(values)
                cnts.append(counts)
                self._bufs.popleft()
                self._buffered -= size
                got += size
                continue
            head_v, head_c = _split_block((values, counts), need)
            vals.append(head_v)
            cnts.append(head_c)
            if counts is None:
                self._bufs[0] = (values[need:], None)
            else:
                taken_runs = head_v.shape[0]
                rest_v = values[taken_runs - 1 :].copy()
                rest_c = counts[taken_runs - 1 :].copy()
                rest_c[0] = counts[taken_runs - 1] - head_c[-1]
                if rest_c[0] == 0:
                    rest_v, rest_c = rest_v[1:], rest_c[1:]
                self._bufs[0] = (rest_v, rest_c)
            self._buffered -= need
            got = n_elems
        return _concat_blocks(vals, cnts)


def _concat_blocks(vals: list[np.ndarray], cnts: list[np.ndarray | None]) -> Block:
    if len(vals) == 1:
        return vals[0], cnts[0]
    values = np.concatenate(vals)
    if all(c is None for c in cnts):
        return values, None
    counts = np.concatenate(
        [np.ones(v.shape[0], dtype=np.int64) if c is None else c for v, c in zip(vals, cnts)]
    )
    return values, counts


def merge_sorted(
    sources: list[Iterator[Block]],
    limit: int | None = None,
    block_elems: int = BLOCK_ELEMS,
) -> Iterator[Block]:
    """Merge sorted block sources into one non-increasing block stream.

    Yields at most ``limit`` elements when given, splitting a run that
    straddles the cut.  Raises StreamExhausted if the sources run dry
    before the limit is met.
    """
    cursors = [RunCursor(s) for s in sources]
    emitted = 0
    while limit is None or emitted < limit:
        vstar = -np.inf
        any_buffered = False
        for cur in cursors:
            cur.ensure(block_elems)
            if cur.buffered:
                any_buffered = True
                if not cur.done:
                    vstar = max(vstar, cur.tail_value())
        if not any_buffered:
            if limit is not None:
                raise StreamExhausted(
                    f"merge exhausted after {emitted} of {limit} elements"
                )
            return
        parts: list[Block] = []
        for cur in cursors:
            parts.extend(cur.pop_ge(vstar))
        values = np.concatenate([p[0] for p in parts])
        if all(p[1] is None for p in parts):
            chunk: Block = (np.sort(values)[::-1], None)
        else:
            counts = np.concatenate(
                [
                    np.ones(p[0].shape[0], dtype=np.int64) if p[1] is None else p[1]
                    for p in parts
                ]
            )
            order = np.argsort(-values, kind="stable")
            chunk = (values[order], counts[order])
        size = block_element_count(chunk)
        if limit is not None and emitted + size > limit:
            chunk = _split_block(chunk, limit - emitted)
            size = limit - emitted
        emitted += size
        yield chunk


def scaled(source: Iterator[Block], factor: float) -> Iterator[Block]:
    """Multiply every value of a block source by a positive constant."""
    for values, counts in source:
        yield values * factor, counts


def expand_block(block: Block) -> np.ndarray:
    """Dense value array of a block (repeats runs by multiplicity)."""
    values, counts = block
    if counts is None:
        return values
    return np.repeat(values, counts)
