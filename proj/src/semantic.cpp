#include "semantic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace lceval {

namespace {

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool is_nonneg_integer(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open embeddings file " + path);
    EmbeddingTable table;
    std::string line;
    size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::vector<std::string> fields;
        std::string f;
        while (ss >> f) fields.push_back(f);
        if (fields.empty()) continue;
        if (first && fields.size() == 2 && is_nonneg_integer(fields[0]) &&
            is_nonneg_integer(fields[1])) {
            first = false;  // `count dim` header
            continue;
        }
        first = false;
        if (fields.size() < 2)
            throw input_error(path + ":" + std::to_string(lineno) + ": embedding line needs a word and at least one value");
        std::vector<double> vec;
        vec.reserve(fields.size() - 1);
        for (size_t i = 1; i < fields.size(); ++i) {
            double v;
            if (!parse_double(fields[i], v) || !std::isfinite(v))
                throw input_error(path + ":" + std::to_string(lineno) + ": bad embedding value \"" + fields[i] + "\"");
            vec.push_back(v);
        }
        if (table.dimension == 0) table.dimension = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != table.dimension)
            throw input_error(path + ":" + std::to_string(lineno) + ": dimension " +
                              std::to_string(vec.size()) + " does not match table dimension " +
                              std::to_string(table.dimension));
        table.vectors.emplace(fields[0], std::move(vec));  // first wins
    }
    return table;
}

std::optional<WordDistribution> word_distribution(const TokenSeq& tokens,
                                                  const EmbeddingTable& table) {
    std::map<std::string, int> counts;
    int total = 0;
    for (const auto& t : tokens) {
        if (table.find(t)) {
            ++counts[t];
            ++total;
        }
    }
    if (total == 0) return std::nullopt;
    WordDistribution d;
    for (const auto& [word, count] : counts) {
        d.support.push_back(word);
        d.weights.push_back(static_cast<double>(count) / total);
        d.counts.push_back(count);
    }
    return d;
}

namespace {

std::optional<std::vector<double>> mean_embedding(const TokenSeq& tokens,
                                                  const EmbeddingTable& table) {
    std::vector<double> sum(table.dimension, 0.0);
    int n = 0;
    for (const auto& t : tokens) {
        const std::vector<double>* v = table.find(t);
        if (!v) continue;
        for (int i = 0; i < table.dimension; ++i) sum[i] += (*v)[i];
        ++n;
    }
    if (n == 0) return std::nullopt;
    for (double& x : sum) x /= n;
    return sum;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

// Successive-shortest-path min-cost flow on the dense transportation
// graph. Supplies and demands are integers, so each augmentation
// saturates a terminal arc and the loop terminates; costs stay floating.
class TransportSolver {
 public:
    TransportSolver(const std::vector<long long>& supply, const std::vector<long long>& demand,
                    const std::vector<std::vector<double>>& cost)
        : m_(supply.size()), n_(demand.size()), supply_(supply), demand_(demand), cost_(cost),
          potential_(m_ + n_ + 2, 0.0), flow_(m_, std::vector<long long>(n_, 0)) {}

    // Total cost of the optimal plan, in supply units.
    double solve() {
        long long remaining = 0;
        for (long long s : supply_) remaining += s;
        while (remaining > 0) {
            if (!augment()) throw internal_error("transport solver failed to route all mass");
            remaining = 0;
            for (size_t i = 0; i < m_; ++i) remaining += supply_[i];
        }
        double total = 0.0;
        for (size_t i = 0; i < m_; ++i)
            for (size_t j = 0; j < n_; ++j)
                if (flow_[i][j] > 0) total += static_cast<double>(flow_[i][j]) * cost_[i][j];
        return total;
    }

 private:
    // Node ids: 0 = source, 1..m = supplies, m+1..m+n = demands, m+n+1 = sink.
    size_t src() const { return 0; }
    size_t snk() const { return m_ + n_ + 1; }
    size_t sup(size_t i) const { return 1 + i; }
    size_t dem(size_t j) const { return 1 + m_ + j; }

    bool augment() {
        const size_t N = m_ + n_ + 2;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(N, inf);
        std::vector<int> prev(N, -1);
        std::vector<bool> done(N, false);
        dist[src()] = 0.0;
        for (size_t iter = 0; iter < N; ++iter) {
            size_t u = N;
            double best = inf;
            for (size_t v = 0; v < N; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u == N) break;
            done[u] = true;
            relax_from(u, dist, prev);
        }
        if (dist[snk()] == inf) return false;
        for (size_t v = 0; v < N; ++v)
            if (dist[v] < inf) potential_[v] += dist[v];

        // Walk the path back, find the bottleneck, then apply it.
        long long bottleneck = std::numeric_limits<long long>::max();
        size_t v = snk();
        while (v != src()) {
            size_t u = static_cast<size_t>(prev[v]);
            bottleneck = std::min(bottleneck, residual(u, v));
            v = u;
        }
        v = snk();
        while (v != src()) {
            size_t u = static_cast<size_t>(prev[v]);
            push(u, v, bottleneck);
            v = u;
        }
        return true;
    }

    long long residual(size_t u, size_t v) const {
        if (u == src()) return supply_[v - 1];
        if (v == snk()) return demand_[v_dem(u)];
        if (is_sup(u) && is_dem(v)) return std::numeric_limits<long long>::max();
        if (is_dem(u) && is_sup(v)) return flow_[v - 1][v_dem(u)];  // backward arc
        return 0;
    }

    void push(size_t u, size_t v, long long amount) {
        if (u == src()) {
            supply_[v - 1] -= amount;
        } else if (v == snk()) {
            demand_[v_dem(u)] -= amount;
        } else if (is_sup(u) && is_dem(v)) {
            flow_[u - 1][v_dem(v)] += amount;
        } else {
            flow_[v - 1][v_dem(u)] -= amount;
        }
    }

    bool is_sup(size_t v) const { return v >= 1 && v <= m_; }
    bool is_dem(size_t v) const { return v > m_ && v <= m_ + n_; }
    size_t v_dem(size_t v) const { return v - m_ - 1; }

    void relax_from(size_t u, std::vector<double>& dist, std::vector<int>& prev) const {
        auto relax = [&](size_t v, double edge_cost) {
            double rc = edge_cost + potential_[u] - potential_[v];
            if (rc < 0.0) rc = 0.0;  // guard small rounding drift
            if (dist[u] + rc < dist[v]) {
                dist[v] = dist[u] + rc;
                prev[v] = static_cast<int>(u);
            }
        };
        if (u == src()) {
            for (size_t i = 0; i < m_; ++i)
                if (supply_[i] > 0) relax(sup(i), 0.0);
        } else if (is_sup(u)) {
            for (size_t j = 0; j < n_; ++j) relax(dem(j), cost_[u - 1][j]);
        } else if (is_dem(u)) {
            size_t j = v_dem(u);
            if (demand_[j] > 0) relax(snk(), 0.0);
            for (size_t i = 0; i < m_; ++i)
                if (flow_[i][j] > 0) relax(sup(i), -cost_[i][j]);
        }
    }

    size_t m_, n_;
    std::vector<long long> supply_, demand_;
    std::vector<std::vector<double>> cost_;
    std::vector<double> potential_;
    std::vector<std::vector<long long>> flow_;
};

}  // namespace

double transport_distance(const WordDistribution& a, const WordDistribution& b,
                          const EmbeddingTable& table) {
    const size_t m = a.support.size(), n = b.support.size();
    std::vector<std::vector<double>> cost(m, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < m; ++i) {
        const std::vector<double>* va = table.find(a.support[i]);
        for (size_t j = 0; j < n; ++j) {
            const std::vector<double>* vb = table.find(b.support[j]);
            if (!va || !vb) throw internal_error("transport support word missing from table");
            cost[i][j] = euclidean(*va, *vb);
        }
    }
    std::vector<long long> supply(m), demand(n);
    double total_mass;
    if (a.counts.size() == m && b.counts.size() == n) {
        // Exact rational rescaling: weight c_i/Ta becomes mass c_i*Tb out
        // of Ta*Tb, with no rounding anywhere.
        long long ta = 0, tb = 0;
        for (long long c : a.counts) ta += c;
        for (long long c : b.counts) tb += c;
        for (size_t i = 0; i < m; ++i) supply[i] = a.counts[i] * tb;
        for (size_t j = 0; j < n; ++j) demand[j] = b.counts[j] * ta;
        total_mass = static_cast<double>(ta) * static_cast<double>(tb);
    } else {
        // General real weights: quantize onto a fine integer grid and
        // settle rounding drift on the largest cell.
        const double scale = 4294967296.0;  // 2^32
        long long ssum = 0, dsum = 0;
        for (size_t i = 0; i < m; ++i) ssum += supply[i] = std::llround(a.weights[i] * scale);
        for (size_t j = 0; j < n; ++j) dsum += demand[j] = std::llround(b.weights[j] * scale);
        size_t ia = std::max_element(supply.begin(), supply.end()) - supply.begin();
        supply[ia] += dsum - ssum;
        total_mass = static_cast<double>(dsum);
    }
    TransportSolver solver(supply, demand, cost);
    return solver.solve() / total_mass;
}

std::optional<double> wmd_distance(const TokenSeq& candidate, const TokenSeq& reference,
                                   const EmbeddingTable& table) {
    auto da = word_distribution(candidate, table);
    auto db = word_distribution(reference, table);
    if (!da || !db) return std::nullopt;
    return transport_distance(*da, *db, table);
}

double wmd_similarity(const TokenSeq& candidate, const TokenSeq& reference,
                      const EmbeddingTable& table) {
    auto d = wmd_distance(candidate, reference, table);
    if (!d) return 0.0;
    return std::exp(-*d);
}

double mowe_cosine(const TokenSeq& candidate, const TokenSeq& reference,
                   const EmbeddingTable& table) {
    auto va = mean_embedding(candidate, table);
    auto vb = mean_embedding(reference, table);
    if (!va || !vb) return 0.0;
    return cosine(*va, *vb);
}

double mowe_similarity(const TokenSeq& candidate, const TokenSeq& reference,
                       const EmbeddingTable& table) {
    return std::max(0.0, mowe_cosine(candidate, reference, table));
}

}  // namespace lceval
