// Copyright 2026 The QDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdp/qstate.hpp"

// Exact earth mover's distance between bitstring distributions under the
// Hamming ground metric, solved by the transportation simplex with Vogel
// initialization and Bland's anti-cycling pivot rule. Dimensions stay at or
// below 64, so no sparsity tricks are needed.

namespace qdp::transport {

namespace detail {

struct Cell {
    std::size_t row;
    std::size_t col;
    double flow;
};

struct Problem {
    std::vector<double> supply;          // filtered to support
    std::vector<double> demand;          // filtered to support
    std::vector<std::size_t> row_index;  // original bin index per row
    std::vector<std::size_t> col_index;  // original bin index per column
    std::vector<std::vector<double>> cost;
};

inline double hamming(std::size_t a, std::size_t b) {
    return static_cast<double>(std::popcount(a ^ b));
}

/// Vogel's approximation for the initial basic feasible solution. Closes
/// one side per allocation so the basis ends with exactly m+n-1 cells.
inline std::vector<Cell> vogel_initial(Problem &pr) {
    const std::size_t m = pr.supply.size();
    const std::size_t n = pr.demand.size();
    std::vector<bool> row_open(m, true), col_open(n, true);
    std::vector<double> s = pr.supply, t = pr.demand;
    std::size_t open_rows = m, open_cols = n;
    std::vector<Cell> basis;
    basis.reserve(m + n - 1);

    auto penalty_row = [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        for (std::size_t j = 0; j < n; ++j) {
            if (!col_open[j]) {
                continue;
            }
            const double c = pr.cost[i][j];
            if (c < best) {
                second = best;
                best = c;
            } else if (c < second) {
                second = c;
            }
        }
        return std::isinf(second) ? best : second - best;
    };
    auto penalty_col = [&](std::size_t j) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        for (std::size_t i = 0; i < m; ++i) {
            if (!row_open[i]) {
                continue;
            }
            const double c = pr.cost[i][j];
            if (c < best) {
                second = best;
                best = c;
            } else if (c < second) {
                second = c;
            }
        }
        return std::isinf(second) ? best : second - best;
    };

    while (open_rows > 0 && open_cols > 0) {
        bool pick_row = true;
        std::size_t pick = 0;
        double best_penalty = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (row_open[i]) {
                const double pen = penalty_row(i);
                if (pen > best_penalty + 1e-15) {
                    best_penalty = pen;
                    pick_row = true;
                    pick = i;
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (col_open[j]) {
                const double pen = penalty_col(j);
                if (pen > best_penalty + 1e-15) {
                    best_penalty = pen;
                    pick_row = false;
                    pick = j;
                }
            }
        }

        std::size_t bi = 0, bj = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        if (pick_row) {
            bi = pick;
            for (std::size_t j = 0; j < n; ++j) {
                if (col_open[j] && pr.cost[bi][j] < best_cost - 1e-15) {
                    best_cost = pr.cost[bi][j];
                    bj = j;
                }
            }
        } else {
            bj = pick;
            for (std::size_t i = 0; i < m; ++i) {
                if (row_open[i] && pr.cost[i][bj] < best_cost - 1e-15) {
                    best_cost = pr.cost[i][bj];
                    bi = i;
                }
            }
        }

        const double amount = std::min(s[bi], t[bj]);
        basis.push_back(Cell{bi, bj, amount});
        s[bi] -= amount;
        t[bj] -= amount;

        const bool last_cell = open_rows == 1 && open_cols == 1;
        if (last_cell) {
            row_open[bi] = false;
            col_open[bj] = false;
            --open_rows;
            --open_cols;
        } else if (s[bi] <= t[bj] && open_rows > 1) {
            row_open[bi] = false;
            --open_rows;
        } else {
            col_open[bj] = false;
            --open_cols;
        }
    }
    return basis;
}

/// Dual potentials from the basis tree (u_0 = 0). Returns false when the
/// basis graph does not span all nodes.
inline bool solve_potentials(const Problem &pr, const std::vector<Cell> &basis,
                             std::vector<double> &u, std::vector<double> &v) {
    const std::size_t m = pr.supply.size();
    const std::size_t n = pr.demand.size();
    u.assign(m, std::numeric_limits<double>::quiet_NaN());
    v.assign(n, std::numeric_limits<double>::quiet_NaN());
    u[0] = 0.0;
    bool progress = true;
    while (progress) {
        progress = false;
        for (const Cell &c : basis) {
            const bool hu = !std::isnan(u[c.row]);
            const bool hv = !std::isnan(v[c.col]);
            if (hu && !hv) {
                v[c.col] = pr.cost[c.row][c.col] - u[c.row];
                progress = true;
            } else if (!hu && hv) {
                u[c.row] = pr.cost[c.row][c.col] - v[c.col];
                progress = true;
            }
        }
    }
    for (double x : u) {
        if (std::isnan(x)) {
            return false;
        }
    }
    for (double x : v) {
        if (std::isnan(x)) {
            return false;
        }
    }
    return true;
}

/// Connects a disconnected (degenerate) basis with zero-flow cells.
inline void repair_basis(const Problem &pr, std::vector<Cell> &basis) {
    std::vector<double> u, v;
    while (!solve_potentials(pr, basis, u, v)) {
        std::size_t add_i = pr.supply.size(), add_j = pr.demand.size();
        for (std::size_t i = 0; i < pr.supply.size() && add_i == pr.supply.size(); ++i) {
            for (std::size_t j = 0; j < pr.demand.size(); ++j) {
                if (std::isnan(u[i]) != std::isnan(v[j])) {
                    add_i = i;
                    add_j = j;
                    break;
                }
            }
        }
        if (add_i == pr.supply.size()) {
            throw std::runtime_error("w1_diag: cannot repair degenerate basis");
        }
        basis.push_back(Cell{add_i, add_j, 0.0});
    }
}

/// Unique cycle created by adding `enter` to the basis tree: node path from
/// enter.row to enter.col, found by DFS over basis edges.
inline std::vector<std::size_t> find_cycle_path(const Problem &pr, const std::vector<Cell> &basis,
                                                std::size_t row_start, std::size_t col_target) {
    const std::size_t m = pr.supply.size();
    const std::size_t n = pr.demand.size();
    // Nodes: rows are [0, m), columns are [m, m+n).
    std::vector<std::vector<std::size_t>> adj(m + n);
    for (std::size_t e = 0; e < basis.size(); ++e) {
        adj[basis[e].row].push_back(e);
        adj[m + basis[e].col].push_back(e);
    }
    std::vector<long> parent_edge(m + n, -1);
    std::vector<long> parent_node(m + n, -1);
    std::vector<bool> seen(m + n, false);
    std::vector<std::size_t> stack = {row_start};
    seen[row_start] = true;
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node == m + col_target) {
            break;
        }
        for (std::size_t e : adj[node]) {
            const std::size_t other =
                node < m ? m + basis[e].col : basis[e].row;
            if (!seen[other]) {
                seen[other] = true;
                parent_edge[other] = static_cast<long>(e);
                parent_node[other] = static_cast<long>(node);
                stack.push_back(other);
            }
        }
    }
    if (!seen[m + col_target]) {
        throw std::runtime_error("w1_diag: basis lost connectivity");
    }
    std::vector<std::size_t> path_edges;
    std::size_t node = m + col_target;
    while (node != row_start) {
        path_edges.push_back(static_cast<std::size_t>(parent_edge[node]));
        node = static_cast<std::size_t>(parent_node[node]);
    }
    std::reverse(path_edges.begin(), path_edges.end()); // from row_start to col_target
    return path_edges;
}

} // namespace detail

struct W1Result {
    double cost = 0.0;
    int pivots = 0;
};

/// Exact W1 between two distributions over n-qubit bitstrings with Hamming
/// ground cost. Optimality is verified internally via the dual potentials
/// (complementary slackness); a violation throws.
inline W1Result w1_diag_full(const qstate::Distribution &p, const qstate::Distribution &q) {
    if (p.probs.size() != q.probs.size()) {
        throw std::invalid_argument("w1_diag: dimension mismatch");
    }
    if (p.probs.size() > 64) {
        throw std::invalid_argument("w1_diag: dimension must be <= 64");
    }
    double mass_p = 0.0, mass_q = 0.0;
    for (double x : p.probs) {
        mass_p += x;
    }
    for (double x : q.probs) {
        mass_q += x;
    }
    if (std::abs(mass_p - mass_q) > 1e-9) {
        throw std::invalid_argument("w1_diag: mass mismatch");
    }

    detail::Problem pr;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] > 1e-15) {
            pr.supply.push_back(p.probs[i]);
            pr.row_index.push_back(i);
        }
        if (q.probs[i] > 1e-15) {
            pr.demand.push_back(q.probs[i] * (mass_p / mass_q));
            pr.col_index.push_back(i);
        }
    }
    if (pr.supply.empty() || pr.demand.empty()) {
        return {0.0, 0};
    }
    pr.cost.assign(pr.supply.size(), std::vector<double>(pr.demand.size(), 0.0));
    for (std::size_t i = 0; i < pr.supply.size(); ++i) {
        for (std::size_t j = 0; j < pr.demand.size(); ++j) {
            pr.cost[i][j] = detail::hamming(pr.row_index[i], pr.col_index[j]);
        }
    }

    std::vector<detail::Cell> basis = detail::vogel_initial(pr);
    detail::repair_basis(pr, basis);

    const std::size_t m = pr.supply.size();
    const std::size_t n = pr.demand.size();
    std::vector<double> u, v;
    int pivots = 0;
    const int max_pivots = static_cast<int>(4096 * (m + n));

    while (true) {
        if (!detail::solve_potentials(pr, basis, u, v)) {
            detail::repair_basis(pr, basis);
            continue;
        }
        // Bland: first nonbasic cell (lexicographic) with negative reduced cost.
        std::vector<std::vector<bool>> is_basic(m, std::vector<bool>(n, false));
        for (const auto &c : basis) {
            is_basic[c.row][c.col] = true;
        }
        std::size_t ei = m, ej = n;
        for (std::size_t i = 0; i < m && ei == m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!is_basic[i][j] && pr.cost[i][j] - u[i] - v[j] < -1e-12) {
                    ei = i;
                    ej = j;
                    break;
                }
            }
        }
        if (ei == m) {
            break; // optimal
        }
        if (++pivots > max_pivots) {
            throw std::runtime_error("w1_diag: pivot limit exceeded");
        }

        const auto path = detail::find_cycle_path(pr, basis, ei, ej);
        // Signs alternate along the cycle; the entering cell is +, the first
        // path edge (sharing the entering row) is -.
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = basis.size();
        for (std::size_t t = 0; t < path.size(); ++t) {
            if (t % 2 == 0) { // minus edge
                const detail::Cell &c = basis[path[t]];
                if (c.flow < theta - 1e-15 ||
                    (std::abs(c.flow - theta) <= 1e-15 && leave < basis.size() &&
                     (c.row < basis[leave].row ||
                      (c.row == basis[leave].row && c.col < basis[leave].col)))) {
                    theta = c.flow;
                    leave = path[t];
                }
            }
        }
        if (leave == basis.size()) {
            throw std::runtime_error("w1_diag: unbounded pivot");
        }
        for (std::size_t t = 0; t < path.size(); ++t) {
            basis[path[t]].flow += (t % 2 == 0 ? -theta : theta);
        }
        basis[leave] = detail::Cell{ei, ej, theta};
    }

    // Complementary slackness audit of the final solution.
    double total = 0.0;
    std::vector<double> row_sum(m, 0.0), col_sum(n, 0.0);
    for (const auto &c : basis) {
        if (c.flow < -1e-12) {
            throw std::runtime_error("w1_diag: negative flow in final plan");
        }
        total += c.flow * pr.cost[c.row][c.col];
        row_sum[c.row] += c.flow;
        col_sum[c.col] += c.flow;
        if (c.flow > 1e-12 &&
            std::abs(pr.cost[c.row][c.col] - u[c.row] - v[c.col]) > 1e-9) {
            throw std::runtime_error("w1_diag: complementary slackness violated");
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(row_sum[i] - pr.supply[i]) > 1e-9) {
            throw std::runtime_error("w1_diag: supply constraint violated");
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(col_sum[j] - pr.demand[j]) > 1e-9) {
            throw std::runtime_error("w1_diag: demand constraint violated");
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (pr.cost[i][j] - u[i] - v[j] < -1e-9) {
                throw std::runtime_error("w1_diag: dual feasibility violated");
            }
        }
    }
    return {total, pivots};
}

inline double w1_diag(const qstate::Distribution &p, const qstate::Distribution &q) {
    return w1_diag_full(p, q).cost;
}

} // namespace qdp::transport
