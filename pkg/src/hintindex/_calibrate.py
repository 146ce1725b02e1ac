import numba


@numba.njit(cache=True)
def compare_loop(vals, ids, pivot, out):
    k = 0
    for i in range(vals.shape[0]):
        if vals[i] >= pivot:
            out[k] = ids[i]
            k += 1
    return k


@numba.njit(cache=True)
def access_loop(ids, out):
    k = 0
    for i in range(ids.shape[0]):
        out[k] = ids[i]
        k += 1
    return k
