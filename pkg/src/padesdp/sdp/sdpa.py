"""SDPA sparse format (".dat-s") writer and parser.

Layout: mDIM, nBLOCK, block structure (negative size = diagonal block), cost
vector, then one "matno blkno i j value" line per nonzero upper-triangular
entry, where matno 0 is F_0.  Lines starting with '"' or '*' are comments;
the writer stores the objective offset and sign in a '*' comment so a
round trip preserves reported objective values.
"""

import io
import re
from pathlib import Path
from typing import Union

import numpy as np
import scipy.sparse as sp

from ..errors import ParseError
from .problem import BlockSDP, SdpBlock

_NUM = "{:.17g}"


def _lines(problem: BlockSDP):
    yield f'"exported block SDP: minimize b^T y s.t. sum y_i F_i - F_0 PSD'
    yield f"* offset {_NUM.format(problem.offset)} sign {_NUM.format(problem.sign)}"
    yield str(problem.num_vars)
    yield str(len(problem.blocks))
    yield " ".join(str(-blk.size if blk.diagonal else blk.size) for blk in problem.blocks)
    yield " ".join(_NUM.format(v) for v in problem.b) if problem.num_vars else "0"
    for bno, blk in enumerate(problem.blocks, start=1):
        s = blk.size
        iu, ju = np.triu_indices(s)
        F0 = blk.F0
        for i, j in zip(iu, ju):
            if F0[i, j] != 0 and (not blk.diagonal or i == j):
                yield f"0 {bno} {i + 1} {j + 1} {_NUM.format(F0[i, j])}"
        coo = blk.A.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            i, j = divmod(int(c), s)
            if i <= j and v != 0:
                yield f"{r + 1} {bno} {i + 1} {j + 1} {_NUM.format(v)}"


def export_sdpa(problem: BlockSDP, destination: Union[str, Path, io.TextIOBase, None] = None) -> str:
    """Write the problem; returns the text (and writes it when a destination is given)."""
    text = "\n".join(_lines(problem)) + "\n"
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text)
    elif destination is not None:
        destination.write(text)
    return text


def _split(line):
    return [tok for tok in re.split(r"[\s,{}()]+", line.strip()) if tok]


def import_sdpa(source: Union[str, Path, io.TextIOBase]) -> BlockSDP:
    """Parse SDPA sparse text, a path to such a file, or an open text stream."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    offset, sign = 0.0, 1.0
    header = []
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0] in '"*':
            m = re.match(r"\*\s*offset\s+(\S+)\s+sign\s+(\S+)", line)
            if m:
                try:
                    offset, sign = float(m.group(1)), float(m.group(2))
                except ValueError:
                    raise ParseError("bad offset comment", lineno)
            continue
        toks = _split(line)
        if len(header) < 4:
            header.append((lineno, toks))
            continue
        if len(toks) != 5:
            raise ParseError(f"expected 5 fields 'matno blkno i j value', got {len(toks)}", lineno)
        try:
            entries.append((lineno, int(toks[0]), int(toks[1]), int(toks[2]), int(toks[3]), float(toks[4])))
        except ValueError:
            raise ParseError(f"malformed entry {line!r}", lineno)
    if len(header) < 4:
        raise ParseError("missing header lines", header[-1][0] if header else 1)

    def ints(k, count=None):
        lineno, toks = header[k]
        try:
            vals = [int(float(t)) for t in toks]
        except ValueError:
            raise ParseError("expected integers", lineno)
        if count is not None and len(vals) < count:
            raise ParseError(f"expected {count} values, got {len(vals)}", lineno)
        return vals[:count] if count is not None else vals

    p = ints(0, 1)[0]
    nblk = ints(1, 1)[0]
    struct = ints(2, nblk)
    if any(s == 0 for s in struct):
        raise ParseError("block size 0", header[2][0])
    lineno, toks = header[3]
    try:
        b = np.array([float(t) for t in toks][:p]) if p else np.zeros(0)
    except ValueError:
        raise ParseError("malformed cost vector", lineno)
    if b.size != p:
        raise ParseError(f"cost vector has {b.size} entries, expected {p}", lineno)

    sizes = [abs(s) for s in struct]
    F0 = [np.zeros((s, s)) for s in sizes]
    trip = [([], [], []) for _ in sizes]
    for lineno, mat, blk, i, j, v in entries:
        if not 0 <= mat <= p:
            raise ParseError(f"matrix number {mat} out of range", lineno)
        if not 1 <= blk <= nblk:
            raise ParseError(f"block number {blk} out of range", lineno)
        s = sizes[blk - 1]
        if not (1 <= i <= s and 1 <= j <= s):
            raise ParseError(f"index ({i}, {j}) outside block of size {s}", lineno)
        if struct[blk - 1] < 0 and i != j:
            raise ParseError("off-diagonal entry in a diagonal block", lineno)
        i, j = min(i, j) - 1, max(i, j) - 1
        if mat == 0:
            F0[blk - 1][i, j] = v
            F0[blk - 1][j, i] = v
        else:
            r, c, d = trip[blk - 1]
            r.append(mat - 1)
            c.append(i * s + j)
            d.append(v)
            if i != j:
                r.append(mat - 1)
                c.append(j * s + i)
                d.append(v)
    blocks = []
    for s, st, F, (r, c, d) in zip(sizes, struct, F0, trip):
        A = sp.csr_matrix((d, (r, c)), shape=(p, s * s))
        blocks.append(SdpBlock(s, F, A, st < 0))
    return BlockSDP(p, b, blocks, offset, sign)
