#include "fspec/kernels.hpp"

#include "fspec/measures.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

namespace fspec::kernels {

namespace {

// Runs body(i) for i in [0, n), rethrowing the first exception after the loop.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < nn; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(m);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

long isqrt(long x) {
    if (x <= 0) return 0;
    long r = static_cast<long>(std::sqrt(static_cast<double>(x)));
    while (r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

}  // namespace

double transform_magnitudes(const MeasureSpec& spec, std::span<const double> points, int dim,
                            std::span<double> out, Exec exec) {
    const std::size_t n = out.size();
    if (points.size() != n * static_cast<std::size_t>(dim))
        throw std::invalid_argument("transform_magnitudes: size mismatch");
    Vec errs(n, 0.0);
    for_each_index(n, exec, [&](std::size_t i) {
        auto v = fourier_eval(spec, points.subspan(i * dim, dim));
        out[i] = std::abs(v.value);
        errs[i] = v.abs_err;
    });
    return errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
}

Composition compose_ball_integrals(std::span<const double> t, std::span<const double> ga,
                                   std::span<const double> gb,
                                   const std::function<std::size_t(double)>& floor_index,
                                   Exec exec) {
    const std::size_t n = t.size();
    Composition c{Vec(n, 0.0), Vec(n, 0.0), Vec(n, 0.0)};
    auto at_floor = [&](double u) { return gb[std::min(floor_index(u), n - 1)]; };
    auto at_ceil = [&](double u) {
        std::size_t i = std::min(floor_index(u), n - 1);
        if (t[i] < u && i + 1 < n) ++i;
        return gb[i];
    };
    auto lerp = [&](double u) {
        std::size_t i = std::min(floor_index(u), n - 1);
        if (i + 1 >= n) return gb[n - 1];
        double f = (u - t[i]) / (t[i + 1] - t[i]);
        f = std::clamp(f, 0.0, 1.0);
        return gb[i] + f * (gb[i + 1] - gb[i]);
    };
    for_each_index(n, exec, [&](std::size_t k) {
        const double T2 = t[k] * t[k];
        double lo = 0.0, hi = 0.0, mid = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            const double dg = ga[i] - ga[i - 1];
            if (dg == 0.0) continue;
            const double a = t[i - 1], b = t[i], m = 0.5 * (a + b);
            lo += dg * at_floor(std::sqrt(std::max(0.0, T2 - b * b)));
            hi += dg * at_ceil(std::sqrt(std::max(0.0, T2 - a * a)));
            mid += dg * lerp(std::sqrt(std::max(0.0, T2 - m * m)));
        }
        c.lower[k] = lo;
        c.upper[k] = hi;
        c.central[k] = std::clamp(mid, lo, hi);
    });
    return c;
}

void lattice_accumulate(int dim, long m_max, const LatticeWeight& weight, std::span<double> sums,
                        Exec exec) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("lattice_accumulate: dim must be 1..3");
    if (m_max <= 0) return;
    const long m2max = m_max * m_max;

    if (dim == 1) {
        // Chunks of consecutive m; each chunk writes disjoint keys, so no merge is needed.
        const long chunk = 4096;
        const std::size_t nchunks = static_cast<std::size_t>((m_max + chunk - 1) / chunk);
        for_each_index(nchunks, exec, [&](std::size_t c) {
            long begin = 1 + static_cast<long>(c) * chunk;
            long end = std::min(m_max, begin + chunk - 1);
            long m[1];
            for (long v = begin; v <= end; ++v) {
                m[0] = v;
                sums[v] += 2.0 * weight(std::span<const long>(m, 1));
            }
        });
        return;
    }

    // Slices of fixed m1 >= 0. Each slice fills its own buffer; buffers are
    // merged serially in slice order so the floating point sums do not
    // depend on scheduling.
    struct Entry {
        std::size_t key;
        double w;
    };
    auto fill_slice = [&](long m1, std::vector<Entry>& buf) {
        buf.clear();
        const long rest = m2max - m1 * m1;
        long m[3] = {m1, 0, 0};
        auto push = [&]() {
            long key = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
            buf.push_back({static_cast<std::size_t>(key), 2.0 * weight(std::span<const long>(m, dim))});
        };
        if (dim == 2) {
            long r = isqrt(rest);
            for (long b = (m1 == 0 ? 1 : -r); b <= r; ++b) {
                m[1] = b;
                push();
            }
        } else {
            long r2 = isqrt(rest);
            for (long b = (m1 == 0 ? 0 : -r2); b <= r2; ++b) {
                long r3 = isqrt(rest - b * b);
                long c0 = (m1 == 0 && b == 0) ? 1 : -r3;
                m[1] = b;
                for (long c = c0; c <= r3; ++c) {
                    m[2] = c;
                    push();
                }
            }
        }
    };

    const double target = 1 << 22;
    long m1 = 0;
    std::vector<std::vector<Entry>> bufs;
    while (m1 <= m_max) {
        // Batch of slices holding roughly `target` points.
        long first = m1;
        double pts = 0.0;
        while (m1 <= m_max && (pts == 0.0 || pts < target)) {
            double rr = static_cast<double>(m2max - m1 * m1);
            pts += (dim == 2) ? 2.0 * std::sqrt(rr) + 1.0 : kPi * rr + 1.0;
            ++m1;
        }
        const std::size_t count = static_cast<std::size_t>(m1 - first);
        if (bufs.size() < count) bufs.resize(count);
        for_each_index(count, exec, [&](std::size_t s) { fill_slice(first + static_cast<long>(s), bufs[s]); });
        for (std::size_t s = 0; s < count; ++s)
            for (const Entry& e : bufs[s]) sums[e.key] += e.w;
    }
}

void kernel_matvec(std::size_t n, const KernelEntry& entry, std::span<const double> w,
                   std::span<double> y, Exec exec) {
    for_each_index(n, exec, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += entry(i, j) * w[j];
        y[i] = acc;
    });
}

void kernel_column(std::size_t n, const KernelEntry& entry, std::size_t j, std::span<double> out,
                   Exec exec) {
    for_each_index(n, exec, [&](std::size_t i) { out[i] = entry(i, j); });
}

}  // namespace fspec::kernels
