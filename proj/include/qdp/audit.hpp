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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdp/mech.hpp"
#include "qdp/rng.hpp"
#include "qdp/sha256.hpp"

// Verifiable DP audit: a Merkle commitment over per-sample privacy records,
// interactive or Fiat-Shamir challenge derivation, response verification and
// soundness accounting.
//
// Byte-level conventions (fixed so independent implementations agree):
//   leaf_i   = SHA256(utf8("{index}|{lambda:.12e}|{epsilon:.12e}"))
//   padding  = SHA256(utf8("PAD"))
//   parent   = SHA256(left_digest || right_digest)
//   Fiat-Shamir index stream: SHA256(root || utf8(eps_claimed as %.12e) ||
//   counter as 8-byte big-endian), first 8 bytes big-endian mod n,
//   duplicates rejected, counter incrementing from 0.

namespace qdp::audit {

using sha256::Digest;

struct AuditRecord {
    std::uint64_t index = 0;
    double lambda_max = 0.0;
    double epsilon = 0.0;
};

/// Honest per-sample record: epsilon = (Delta^2/2) lambda (1 - c gamma).
inline AuditRecord make_record(std::uint64_t index, double lambda_max,
                               const mech::MechanismConfig &cfg) {
    return AuditRecord{index, lambda_max,
                       0.5 * cfg.delta * cfg.delta * lambda_max * (1.0 - cfg.c_gamma())};
}

inline std::string format_scientific(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return std::string(buf);
}

inline std::string leaf_payload(const AuditRecord &r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%llu|%.12e|%.12e",
                  static_cast<unsigned long long>(r.index), r.lambda_max, r.epsilon);
    return std::string(buf);
}

inline Digest leaf_hash(const AuditRecord &r) { return sha256::hash(leaf_payload(r)); }

inline Digest padding_leaf() { return sha256::hash(std::string("PAD")); }

inline Digest parent_hash(const Digest &left, const Digest &right) {
    sha256::Hasher h;
    h.update(left.data(), left.size());
    h.update(right.data(), right.size());
    return h.finish();
}

// ---------------------------------------------------------------------------
// Merkle tree
// ---------------------------------------------------------------------------

struct MerkleTree {
    std::vector<std::vector<Digest>> levels; // levels[0] = padded leaves
    std::size_t leaf_count = 0;              // before padding

    const Digest &root() const { return levels.back().front(); }
    std::size_t padded_count() const { return levels.front().size(); }
};

struct ProofNode {
    Digest hash;
    bool sibling_on_left = false;
};

struct InclusionProof {
    std::size_t leaf_index = 0;
    std::vector<ProofNode> siblings;
};

inline MerkleTree build_tree(const std::vector<Digest> &leaves) {
    if (leaves.empty()) {
        throw std::invalid_argument("build_tree: no leaves");
    }
    std::size_t padded = 1;
    while (padded < leaves.size()) {
        padded *= 2;
    }
    padded = std::max<std::size_t>(padded, 2);

    MerkleTree tree;
    tree.leaf_count = leaves.size();
    std::vector<Digest> level = leaves;
    level.resize(padded, padding_leaf());
    tree.levels.push_back(level);
    while (level.size() > 1) {
        std::vector<Digest> next(level.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = parent_hash(level[2 * i], level[2 * i + 1]);
        }
        tree.levels.push_back(next);
        level = std::move(next);
    }
    return tree;
}

inline InclusionProof prove(const MerkleTree &tree, std::size_t leaf_index) {
    if (leaf_index >= tree.padded_count()) {
        throw std::out_of_range("prove: leaf index out of range");
    }
    InclusionProof proof;
    proof.leaf_index = leaf_index;
    std::size_t idx = leaf_index;
    for (std::size_t lvl = 0; lvl + 1 < tree.levels.size(); ++lvl) {
        const std::size_t sib = idx ^ 1U;
        proof.siblings.push_back(ProofNode{tree.levels[lvl][sib], sib < idx});
        idx /= 2;
    }
    return proof;
}

inline bool verify_proof(const Digest &leaf, const InclusionProof &proof, const Digest &root) {
    Digest acc = leaf;
    for (const ProofNode &node : proof.siblings) {
        acc = node.sibling_on_left ? parent_hash(node.hash, acc) : parent_hash(acc, node.hash);
    }
    return acc == root;
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

struct Commitment {
    MerkleTree tree;
    double eps_claimed = 0.0; // max_i epsilon_i for an honest prover
};

/// Round 1: the prover commits to all per-sample records.
inline Commitment commit(const std::vector<AuditRecord> &records) {
    if (records.empty()) {
        throw std::invalid_argument("commit: no records");
    }
    std::vector<Digest> leaves;
    leaves.reserve(records.size());
    double eps_max = records.front().epsilon;
    for (const auto &r : records) {
        leaves.push_back(leaf_hash(r));
        eps_max = std::max(eps_max, r.epsilon);
    }
    return Commitment{build_tree(leaves), eps_max};
}

struct ChallengeMode {
    enum class Kind { Interactive, FiatShamir };
    Kind kind = Kind::FiatShamir;
    std::uint64_t seed = 0; // Interactive only

    static ChallengeMode interactive(std::uint64_t seed) {
        return ChallengeMode{Kind::Interactive, seed};
    }
    static ChallengeMode fiat_shamir() { return ChallengeMode{Kind::FiatShamir, 0}; }
};

/// Round 2: k = ceil(ratio n) distinct indices in [0, n). Interactive mode
/// draws uniformly without replacement from the given seed; Fiat-Shamir
/// derives indices from SHA256(root || eps_claimed || counter).
inline std::vector<std::size_t> challenge(std::size_t n, double ratio, const ChallengeMode &mode,
                                          const Digest &root, double eps_claimed) {
    if (n == 0) {
        throw std::invalid_argument("challenge: n must be positive");
    }
    if (ratio <= 0.0 || ratio > 1.0) {
        throw std::invalid_argument("challenge: ratio must lie in (0,1]");
    }
    const std::size_t k =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n))));
    std::vector<std::size_t> picked;
    std::vector<bool> used(n, false);
    picked.reserve(k);

    if (mode.kind == ChallengeMode::Kind::Interactive) {
        rng::Xoshiro256pp gen(mode.seed);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + gen.below(n - i);
            std::swap(order[i], order[j]);
            picked.push_back(order[i]);
        }
    } else {
        const std::string eps_str = format_scientific(eps_claimed);
        std::uint64_t counter = 0;
        while (picked.size() < k) {
            sha256::Hasher h;
            h.update(root.data(), root.size());
            h.update(eps_str.data(), eps_str.size());
            std::uint8_t ctr_be[8];
            for (int i = 0; i < 8; ++i) {
                ctr_be[i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
            }
            h.update(ctr_be, 8);
            const Digest d = h.finish();
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i) {
                v = (v << 8) | d[static_cast<std::size_t>(i)];
            }
            const std::size_t idx = static_cast<std::size_t>(v % n);
            if (!used[idx]) {
                used[idx] = true;
                picked.push_back(idx);
            }
            ++counter;
        }
    }
    return picked;
}

struct Response {
    AuditRecord record;
    InclusionProof proof;
};

/// Round 3 (prover side): records and proofs for the challenged indices.
inline std::vector<Response> respond(const MerkleTree &tree,
                                     const std::vector<AuditRecord> &records,
                                     const std::vector<std::size_t> &challenge_set) {
    std::vector<Response> out;
    out.reserve(challenge_set.size());
    for (std::size_t idx : challenge_set) {
        if (idx >= records.size()) {
            throw std::out_of_range("respond: challenged index out of range");
        }
        out.push_back(Response{records[idx], prove(tree, idx)});
    }
    return out;
}

enum class RejectReason { BadProof, EpsExceedsClaim, EpsFormulaMismatch };

inline const char *reject_reason_name(RejectReason r) {
    switch (r) {
    case RejectReason::BadProof:
        return "BAD_PROOF";
    case RejectReason::EpsExceedsClaim:
        return "EPS_EXCEEDS_CLAIM";
    case RejectReason::EpsFormulaMismatch:
        return "EPS_FORMULA_MISMATCH";
    }
    return "UNKNOWN";
}

struct AuditTranscript {
    Digest root{};
    double eps_claimed = 0.0;
    std::vector<std::size_t> challenge_set;
    std::vector<Response> responses;
    bool accepted = false;
    std::vector<std::pair<std::size_t, RejectReason>> reject_reasons;
};

/// Round 3 (verifier side): per challenged index checks (i) the Merkle proof
/// against the published root, (ii) epsilon_i <= eps_claimed, and (iii) the
/// epsilon formula epsilon_i = (Delta^2/2) lambda_i (1 - c gamma).
inline AuditTranscript verify(const Digest &root, double eps_claimed,
                              const std::vector<std::size_t> &challenge_set,
                              const std::vector<Response> &responses,
                              const mech::MechanismConfig &cfg) {
    AuditTranscript t;
    t.root = root;
    t.eps_claimed = eps_claimed;
    t.challenge_set = challenge_set;
    t.responses = responses;
    t.accepted = true;
    if (responses.size() != challenge_set.size()) {
        t.accepted = false;
        t.reject_reasons.emplace_back(0, RejectReason::BadProof);
        return t;
    }
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const Response &r = responses[i];
        bool bad_proof = r.proof.leaf_index != challenge_set[i] ||
                         r.record.index != challenge_set[i] ||
                         !verify_proof(leaf_hash(r.record), r.proof, root);
        if (bad_proof) {
            t.accepted = false;
            t.reject_reasons.emplace_back(challenge_set[i], RejectReason::BadProof);
            continue;
        }
        if (r.record.epsilon > eps_claimed * (1.0 + 1e-12) + 1e-300) {
            t.accepted = false;
            t.reject_reasons.emplace_back(challenge_set[i], RejectReason::EpsExceedsClaim);
        }
        const double expected =
            0.5 * cfg.delta * cfg.delta * r.record.lambda_max * (1.0 - cfg.c_gamma());
        const double scale = std::max(std::abs(expected), 1e-30);
        if (std::abs(r.record.epsilon - expected) > 1e-9 * scale) {
            t.accepted = false;
            t.reject_reasons.emplace_back(challenge_set[i], RejectReason::EpsFormulaMismatch);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Soundness accounting
// ---------------------------------------------------------------------------

struct Soundness {
    double error = 1.0;
    double security_bits = 0.0;
};

/// Probability (1-f)^k that k uniformly challenged samples all miss the
/// fraudulent fraction f, and the corresponding security level in bits.
inline Soundness soundness_error(double fraud_fraction, int challenges) {
    if (fraud_fraction < 0.0 || fraud_fraction > 1.0) {
        throw std::invalid_argument("soundness_error: fraction must lie in [0,1]");
    }
    if (challenges < 0) {
        throw std::invalid_argument("soundness_error: challenge count must be nonnegative");
    }
    Soundness s;
    s.error = std::pow(1.0 - fraud_fraction, challenges);
    s.security_bits = s.error > 0.0 ? -std::log2(s.error) : std::numeric_limits<double>::infinity();
    return s;
}

/// Exact miss probability C(n-m, k) / C(n, k) when challenging k of n samples
/// with m fraudulent ones (hypergeometric, without replacement).
inline double exact_miss_probability(int n, int m, int k) {
    if (n <= 0 || m < 0 || m > n || k < 0 || k > n) {
        throw std::invalid_argument("exact_miss_probability: bad arguments");
    }
    if (k > n - m) {
        return 0.0;
    }
    double p = 1.0;
    for (int i = 0; i < k; ++i) {
        p *= static_cast<double>(n - m - i) / static_cast<double>(n - i);
    }
    return p;
}

} // namespace qdp::audit
