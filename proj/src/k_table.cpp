#include "poipred/k_table.hpp"

#include <algorithm>

#include "poipred/kfun.hpp"
#include "poipred/parallel.hpp"

namespace poipred {

KTable build_k_table(const std::vector<double>& gamma_vec, const std::vector<double>& offset,
                     double alpha, const std::vector<int>& dims) {
    const std::size_t d = gamma_vec.size();
    KTable table;
    table.dims = dims;
    table.strides.assign(d, 0);
    long total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        table.strides[i] = total;
        total *= dims[i];
    }
    table.logk.assign(total, 0.0);
    table.n_evals = total;

    const std::size_t chunk = 256;
    const std::size_t n_chunks = (static_cast<std::size_t>(total) + chunk - 1) / chunk;
    std::vector<double> chunk_max(n_chunks, 0.0);
    parallel_chunks(static_cast<std::size_t>(total), chunk,
                    [&](std::size_t c, std::size_t begin, std::size_t end) {
                        std::vector<double> x(d);
                        double worst = 0.0;
                        for (std::size_t flat = begin; flat < end; ++flat) {
                            long rem = static_cast<long>(flat);
                            for (std::size_t i = d; i-- > 0;) {
                                const long ci = rem / table.strides[i];
                                rem -= ci * table.strides[i];
                                x[i] = static_cast<double>(ci) + offset[i];
                            }
                            const LogK k = k_eval(KArgs(gamma_vec, x, alpha));
                            table.logk[flat] = k.log_value;
                            worst = std::max(worst, k.est_rel_err);
                        }
                        chunk_max[c] = worst;
                    });
    for (double m : chunk_max) table.max_est = std::max(table.max_est, m);
    return table;
}

}  // namespace poipred
