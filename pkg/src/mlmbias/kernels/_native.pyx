# cython: boundscheck=False, wraparound=False, cdivision=True
"""Streaming C implementation of the pairwise accumulation kernel.

Same contract as the numpy fallback: unit-normalized float64 embedding
rows, strict greater-than preference, Neumaier-compensated sums.
"""

from libc.math cimport fabs


def mbe_accumulate(double[:, ::1] emb_m, double[:, ::1] emb_f,
                   double[::1] aula_m, double[::1] aula_f):
    cdef Py_ssize_t n_m = emb_m.shape[0]
    cdef Py_ssize_t n_f = emb_f.shape[0]
    cdef Py_ssize_t dim = emb_m.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double num = 0.0, num_comp = 0.0
    cdef double den = 0.0, den_comp = 0.0
    cdef double weight, total

    for i in range(n_m):
        for j in range(n_f):
            weight = 0.0
            for k in range(dim):
                weight += emb_m[i, k] * emb_f[j, k]
            total = den + weight
            if fabs(den) >= fabs(weight):
                den_comp += (den - total) + weight
            else:
                den_comp += (weight - total) + den
            den = total
            if aula_m[i] > aula_f[j]:
                total = num + weight
                if fabs(num) >= fabs(weight):
                    num_comp += (num - total) + weight
                else:
                    num_comp += (weight - total) + num
                num = total
    return num + num_comp, den + den_comp
