#include "shiftlab/error.hpp"
#include "shiftlab/shift_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace shiftlab::diagnostics {

namespace {

constexpr double kFlowEpsilon = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_length(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw DataError("distribution lengths differ: " + std::to_string(p.size()) + " vs " +
                        std::to_string(q.size()));
    }
}

} // namespace

double distance(std::span<const double> p, std::span<const double> q) {
    check_same_length(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += std::abs(p[i] - q[i]);
    }
    return 0.5 * sum;
}

double distance_to_uniform(std::span<const double> p) {
    if (p.empty()) {
        throw DataError("empty distribution");
    }
    // TV equals the total deficit below 1/K: (m - K * S) / K over the m
    // entries with K * p_i < 1, whose masses sum to S.
    const double k = static_cast<double>(p.size());
    double deficit_mass = 0.0;
    std::size_t deficit_count = 0;
    for (double x : p) {
        if (k * x < 1.0) {
            deficit_mass += x;
            ++deficit_count;
        }
    }
    return std::max(0.0, (static_cast<double>(deficit_count) - k * deficit_mass) / k);
}

double distance_to_one_hot(std::span<const double> p, std::size_t index) {
    if (index >= p.size()) {
        throw DataError("one-hot index " + std::to_string(index) + " out of range for K = " +
                        std::to_string(p.size()));
    }
    return std::max(0.0, 1.0 - p[index]);
}

std::vector<double> discrete_cost(std::size_t k) {
    std::vector<double> cost(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        cost[i * k + i] = 0.0;
    }
    return cost;
}

double wasserstein1(std::span<const double> p, std::span<const double> q, std::span<const double> cost) {
    check_same_length(p, q);
    const std::size_t k = p.size();
    if (cost.size() != k * k) {
        throw DataError("cost matrix must be K x K");
    }
    for (double c : cost) {
        if (!std::isfinite(c) || c < 0.0) {
            throw DataError("cost matrix entries must be finite and non-negative");
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) {
            throw DataError("masses must be non-negative");
        }
    }
    const double total_p = std::accumulate(p.begin(), p.end(), 0.0);
    const double total_q = std::accumulate(q.begin(), q.end(), 0.0);
    if (std::abs(total_p - total_q) > 1e-9) {
        throw DataError("distributions carry different total mass");
    }

    // Successive shortest paths on the bipartite transport network
    // source -> supply i -> demand j -> sink, with Johnson potentials.
    const std::size_t n = 2 * k + 2;
    const std::size_t source = 0;
    const std::size_t sink = 2 * k + 1;
    const auto supply = [](std::size_t i) { return 1 + i; };
    const auto demand = [k](std::size_t j) { return 1 + k + j; };

    std::vector<double> supply_left(p.begin(), p.end());
    std::vector<double> demand_left(q.begin(), q.end());
    std::vector<double> shipped_out(k, 0.0);
    std::vector<double> shipped_in(k, 0.0);
    std::vector<double> flow(k * k, 0.0);
    std::vector<double> potential(n, 0.0);
    double total_cost = 0.0;

    std::vector<double> dist(n);
    std::vector<std::size_t> parent(n);
    std::vector<bool> done(n);

    const auto relax = [&](std::size_t u, std::size_t v, double edge_cost) {
        const double reduced = std::max(0.0, edge_cost + potential[u] - potential[v]);
        if (dist[u] + reduced < dist[v]) {
            dist[v] = dist[u] + reduced;
            parent[v] = u;
        }
    };

    while (true) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(done.begin(), done.end(), false);
        dist[source] = 0.0;
        for (std::size_t iter = 0; iter < n; ++iter) {
            std::size_t u = n;
            for (std::size_t v = 0; v < n; ++v) {
                if (!done[v] && dist[v] < kInf && (u == n || dist[v] < dist[u])) {
                    u = v;
                }
            }
            if (u == n) {
                break;
            }
            done[u] = true;
            if (u == source) {
                for (std::size_t i = 0; i < k; ++i) {
                    if (supply_left[i] > kFlowEpsilon) {
                        relax(u, supply(i), 0.0);
                    }
                }
            } else if (u == sink) {
                for (std::size_t j = 0; j < k; ++j) {
                    if (shipped_in[j] > kFlowEpsilon) {
                        relax(u, demand(j), 0.0);
                    }
                }
            } else if (u <= k) {
                const std::size_t i = u - 1;
                if (shipped_out[i] > kFlowEpsilon) {
                    relax(u, source, 0.0);
                }
                for (std::size_t j = 0; j < k; ++j) {
                    relax(u, demand(j), cost[i * k + j]);
                }
            } else {
                const std::size_t j = u - 1 - k;
                if (demand_left[j] > kFlowEpsilon) {
                    relax(u, sink, 0.0);
                }
                for (std::size_t i = 0; i < k; ++i) {
                    if (flow[i * k + j] > kFlowEpsilon) {
                        relax(u, supply(i), -cost[i * k + j]);
                    }
                }
            }
        }
        if (dist[sink] == kInf) {
            break;
        }
        for (std::size_t v = 0; v < n; ++v) {
            potential[v] += std::min(dist[v], dist[sink]);
        }

        // Bottleneck along the path.
        double amount = kInf;
        for (std::size_t v = sink; v != source; v = parent[v]) {
            const std::size_t u = parent[v];
            if (u == source) {
                amount = std::min(amount, supply_left[v - 1]);
            } else if (v == sink) {
                amount = std::min(amount, demand_left[u - 1 - k]);
            } else if (u == sink) {
                amount = std::min(amount, shipped_in[v - 1 - k]);
            } else if (v == source) {
                amount = std::min(amount, shipped_out[u - 1]);
            } else if (u > k && v <= k) {
                amount = std::min(amount, flow[(v - 1) * k + (u - 1 - k)]);
            }
        }
        const auto take = [amount](double& residual) {
            residual -= amount;
            if (residual <= kFlowEpsilon) {
                residual = 0.0;
            }
        };
        for (std::size_t v = sink; v != source; v = parent[v]) {
            const std::size_t u = parent[v];
            if (u == source) {
                take(supply_left[v - 1]);
                shipped_out[v - 1] += amount;
            } else if (v == source) {
                take(shipped_out[u - 1]);
                supply_left[u - 1] += amount;
            } else if (v == sink) {
                take(demand_left[u - 1 - k]);
                shipped_in[u - 1 - k] += amount;
            } else if (u == sink) {
                take(shipped_in[v - 1 - k]);
                demand_left[v - 1 - k] += amount;
            } else if (u <= k) {
                const std::size_t i = u - 1;
                const std::size_t j = v - 1 - k;
                flow[i * k + j] += amount;
                total_cost += amount * cost[i * k + j];
            } else {
                const std::size_t i = v - 1;
                const std::size_t j = u - 1 - k;
                take(flow[i * k + j]);
                total_cost -= amount * cost[i * k + j];
            }
        }
    }
    return std::max(0.0, total_cost);
}

} // namespace shiftlab::diagnostics
