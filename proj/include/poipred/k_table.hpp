#pragma once

#include <vector>

namespace poipred {

// Dense log K table over an integer count box: entry c holds
// log K(gamma_vec, c + offset, alpha) for c in [0,dims_1) x ... x [0,dims_d).
// Built in parallel; entries are independent, so the result does not depend
// on the worker count.
struct KTable {
    std::vector<int> dims;
    std::vector<long> strides;
    std::vector<double> logk;
    double max_est = 0.0;
    long n_evals = 0;

    long index(const int* c) const {
        long idx = 0;
        for (std::size_t i = 0; i < dims.size(); ++i) idx += c[i] * strides[i];
        return idx;
    }
    double at(const int* c) const { return logk[index(c)]; }
};

KTable build_k_table(const std::vector<double>& gamma_vec, const std::vector<double>& offset,
                     double alpha, const std::vector<int>& dims);

}  // namespace poipred
