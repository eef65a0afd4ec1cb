"""Small fixed-size vector/matrix math on explicitly 16-byte-aligned storage.

Every AlignedVec3 occupies 4 lanes (the 4th is padding, always 0.0) so that
an array of them has SIMD-friendly 16-byte rows at 32-bit precision.  All
arithmetic is pinned to a fixed lane-by-lane evaluation order so results are
bitwise reproducible against a scalar reference.
"""

import math

import numpy as np

ALIGNMENT = 16


def aligned_empty(shape, dtype=np.float64, alignment=ALIGNMENT):
    """Allocate an ndarray whose first byte sits on an `alignment` boundary."""
    dtype = np.dtype(dtype)
    nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    raw = np.empty(nbytes + alignment, dtype=np.uint8)
    offset = (-raw.ctypes.data) % alignment
    view = raw[offset:offset + nbytes].view(dtype).reshape(shape)
    assert view.ctypes.data % alignment == 0
    return view


def aligned_zeros(shape, dtype=np.float64, alignment=ALIGNMENT):
    out = aligned_empty(shape, dtype, alignment)
    out[...] = 0
    return out


class AlignedVec3:
    """3D vector in 4-lane aligned storage; immutable after construction."""

    __slots__ = ("_data",)

    def __init__(self, x=0.0, y=0.0, z=0.0, dtype=np.float64):
        data = aligned_zeros(4, dtype)
        data[0] = x
        data[1] = y
        data[2] = z
        data.flags.writeable = False
        self._data = data

    @classmethod
    def _wrap(cls, data):
        if data.ctypes.data % ALIGNMENT:
            dst = aligned_empty(4, data.dtype)
            dst[...] = data
            data = dst
        v = object.__new__(cls)
        data.flags.writeable = False
        v._data = data
        return v

    @property
    def x(self):
        return self._data[0].item()

    @property
    def y(self):
        return self._data[1].item()

    @property
    def z(self):
        return self._data[2].item()

    @property
    def dtype(self):
        return self._data.dtype

    @property
    def address(self):
        return self._data.ctypes.data

    @property
    def lanes(self):
        """All 4 stored lanes, padding included (read-only view)."""
        return self._data

    def __repr__(self):
        return f"AlignedVec3({self.x}, {self.y}, {self.z})"

    def __eq__(self, other):
        if not isinstance(other, AlignedVec3):
            return NotImplemented
        return bool(np.all(self._data == other._data))

    def __hash__(self):
        return hash(self._data.tobytes())

    def __add__(self, other):
        return AlignedVec3._wrap(self._data + other._data)

    def __sub__(self, other):
        return AlignedVec3._wrap(self._data - other._data)

    def __mul__(self, s):
        return AlignedVec3._wrap(self._data * self._data.dtype.type(s))

    __rmul__ = __mul__

    def dot(self, other):
        a, b = self._data, other._data
        # fixed association: (x*x' + y*y') + z*z'
        return ((a[0] * b[0] + a[1] * b[1]) + a[2] * b[2]).item()

    def cross(self, other):
        a, b = self._data, other._data
        out = aligned_zeros(4, self._data.dtype)
        out[0] = a[1] * b[2] - a[2] * b[1]
        out[1] = a[2] * b[0] - a[0] * b[2]
        out[2] = a[0] * b[1] - a[1] * b[0]
        return AlignedVec3._wrap(out)

    def length(self):
        return math.sqrt(self.dot(self)) if self._data.dtype == np.float64 \
            else np.sqrt(self._data.dtype.type(self.dot(self))).item()

    def normalized(self):
        n = self.length()
        if n == 0.0:
            raise DegenerateVectorError("cannot normalize a zero-length vector")
        return AlignedVec3._wrap(self._data / self._data.dtype.type(n))


class DegenerateVectorError(ValueError):
    pass


class Matrix3:
    """3x3 matrix stored as 3 column vectors, each a 4-lane aligned row."""

    __slots__ = ("_cols",)

    def __init__(self, col0, col1, col2):
        dtype = col0.dtype
        cols = aligned_zeros((3, 4), dtype)
        for i, c in enumerate((col0, col1, col2)):
            cols[i, 0] = c.x
            cols[i, 1] = c.y
            cols[i, 2] = c.z
        cols.flags.writeable = False
        self._cols = cols

    @classmethod
    def identity(cls, dtype=np.float64):
        one = np.dtype(dtype).type(1)
        return cls(AlignedVec3(one, 0, 0, dtype=dtype),
                   AlignedVec3(0, one, 0, dtype=dtype),
                   AlignedVec3(0, 0, one, dtype=dtype))

    @classmethod
    def from_rows(cls, rows, dtype=np.float64):
        r = np.asarray(rows, dtype=dtype)
        return cls(AlignedVec3(r[0, 0], r[1, 0], r[2, 0], dtype=dtype),
                   AlignedVec3(r[0, 1], r[1, 1], r[2, 1], dtype=dtype),
                   AlignedVec3(r[0, 2], r[1, 2], r[2, 2], dtype=dtype))

    def col(self, i):
        c = self._cols[i]
        return AlignedVec3(c[0], c[1], c[2], dtype=c.dtype)

    @property
    def dtype(self):
        return self._cols.dtype

    @property
    def address(self):
        return self._cols.ctypes.data

    def __matmul__(self, v):
        return matvec(self, v)

    def __repr__(self):
        return f"Matrix3(cols={self._cols[:, :3].tolist()})"


def matvec(m: Matrix3, v: AlignedVec3) -> AlignedVec3:
    """m @ v in pinned column-combination order: (x*col0 + y*col1) + z*col2."""
    c = m._cols
    d = v._data
    return AlignedVec3._wrap((c[0] * d[0] + c[1] * d[1]) + c[2] * d[2])
