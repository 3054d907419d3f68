#include "syntactic.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace lceval {

void validate_parse(const DepParse& parse, const std::string& where) {
    const int n = static_cast<int>(parse.tokens.size());
    if (static_cast<int>(parse.heads.size()) != n)
        throw input_error(where + ": " + std::to_string(parse.heads.size()) + " heads for " +
                          std::to_string(n) + " tokens");
    if (n == 0) throw input_error(where + ": empty parse");
    int roots = 0;
    for (int h : parse.heads) {
        if (h < 0 || h > n)
            throw input_error(where + ": head index " + std::to_string(h) + " outside [0," +
                              std::to_string(n) + "]");
        if (h == 0) ++roots;
    }
    if (roots != 1)
        throw input_error(where + ": expected exactly one root, found " + std::to_string(roots));
    // Walk up from every token; a cycle shows up as a walk longer than n.
    for (int start = 1; start <= n; ++start) {
        int cur = start, steps = 0;
        while (cur != 0) {
            cur = parse.heads[cur - 1];
            if (++steps > n) throw input_error(where + ": head graph contains a cycle");
        }
    }
}

HeadChainBag head_chains(const DepParse& parse, int u) {
    if (u < 1 || u > 4) throw input_error("chain length must be in [1,4], got " + std::to_string(u));
    validate_parse(parse);
    HeadChainBag bag;
    bag.length = u;
    const int n = static_cast<int>(parse.tokens.size());
    for (int start = 1; start <= n; ++start) {
        std::string key;
        int cur = start;
        bool ok = true;
        for (int step = 0; step < u; ++step) {
            if (cur == 0) {  // would step onto the virtual root
                ok = false;
                break;
            }
            if (step) key += ' ';
            key += ascii_lower(parse.tokens[cur - 1]);
            cur = parse.heads[cur - 1];
        }
        if (ok) ++bag.counts[key];
    }
    return bag;
}

double hwcm_single(const DepParse& candidate, const DepParse& reference, int u) {
    HeadChainBag cand = head_chains(candidate, u);
    if (cand.counts.empty()) return 0.0;
    HeadChainBag ref = head_chains(reference, u);
    long long total = 0, matched = 0;
    for (const auto& [chain, count] : cand.counts) {
        total += count;
        auto it = ref.counts.find(chain);
        if (it != ref.counts.end()) matched += std::min(count, it->second);
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

double hwcm(const DepParse& candidate, const std::vector<DepParse>& references, int u) {
    if (references.empty()) throw input_error("hwcm needs at least one reference parse");
    double best = 0.0;
    for (const auto& ref : references) best = std::max(best, hwcm_single(candidate, ref, u));
    return best;
}

std::vector<DepParse> load_parse_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open parse sidecar " + path);
    std::vector<DepParse> out;
    DepParse cur;
    std::string line;
    size_t lineno = 0;
    auto flush = [&]() {
        if (cur.tokens.empty()) return;
        validate_parse(cur, path + " sentence " + std::to_string(out.size() + 1));
        out.push_back(std::move(cur));
        cur = DepParse{};
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            flush();
            continue;
        }
        std::istringstream ss(line);
        int index = 0, head = -1;
        std::string token;
        if (!(ss >> index >> token >> head))
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": expected `index token head`");
        if (index != static_cast<int>(cur.tokens.size()) + 1)
            throw input_error(path + ":" + std::to_string(lineno) + ": token index " +
                              std::to_string(index) + " out of sequence");
        cur.tokens.push_back(ascii_lower(token));
        cur.heads.push_back(head);
    }
    flush();
    return out;
}

}  // namespace lceval
