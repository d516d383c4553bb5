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

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qdp/harness.hpp"

namespace {

using qdp::harness::ExperimentConfig;
using qdp::harness::RunResult;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool check = false;
};

ExperimentConfig resolve_config(const CommonOpts &opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = qdp::harness::load_config(opts.config_path, cfg);
    }
    if (opts.has_seed) {
        cfg.seed = opts.seed;
    }
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    }
    return cfg;
}

int finish(const RunResult &res, const ExperimentConfig &cfg, bool check) {
    qdp::harness::write_result(res, cfg.out_dir);
    std::printf("%s: wrote %s/%s.csv and %s_summary.json\n", res.name.c_str(),
                cfg.out_dir.c_str(), res.name.c_str(), res.name.c_str());
    for (const auto &note : res.check_notes) {
        std::printf("  %s\n", note.c_str());
    }
    if (check && !res.check_pass) {
        return 2;
    }
    return 0;
}

void add_common(CLI::App *cmd, CommonOpts &opts) {
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&opts](const std::string &) { opts.has_seed = true; });
    cmd->add_flag("--check", opts.check, "exit 2 when a result check fails");
}

int run_audit_commit(const ExperimentConfig &cfg) {
    qdp::harness::AuditArtifacts art;
    const RunResult res = qdp::harness::run_audit(cfg, &art);
    qdp::harness::write_result(res, cfg.out_dir);

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream f(cfg.out_dir + "/commitment.txt", std::ios::binary);
        f << qdp::sha256::to_hex(art.commitment.tree.root()) << " "
          << qdp::audit::format_scientific(art.commitment.eps_claimed) << "\n";
    }
    {
        std::ofstream f(cfg.out_dir + "/audit_records.csv", std::ios::binary);
        f << "index,lambda_max,epsilon\n";
        char buf[96];
        for (const auto &r : art.records) {
            std::snprintf(buf, sizeof(buf), "%llu,%.12e,%.12e\n",
                          static_cast<unsigned long long>(r.index), r.lambda_max, r.epsilon);
            f << buf;
        }
    }
    {
        std::ofstream f(cfg.out_dir + "/transcript.json", std::ios::binary);
        f << qdp::harness::transcript_to_json(art.transcript).dump(2) << "\n";
    }
    std::printf("audit commit: root %s\n", qdp::sha256::to_hex(art.commitment.tree.root()).c_str());
    std::printf("  wrote %s/commitment.txt, audit_records.csv, transcript.json\n",
                cfg.out_dir.c_str());
    return 0;
}

int run_audit_challenge(const ExperimentConfig &cfg) {
    std::ifstream f(cfg.out_dir + "/commitment.txt");
    if (!f) {
        std::fprintf(stderr,
                     "audit challenge: missing %s/commitment.txt (run `qdp audit commit`)\n",
                     cfg.out_dir.c_str());
        return 1;
    }
    std::string root_hex;
    double eps_claimed = 0.0;
    f >> root_hex >> eps_claimed;
    const auto set = qdp::audit::challenge(
        static_cast<std::size_t>(cfg.audit_n), cfg.audit_ratio,
        qdp::audit::ChallengeMode::fiat_shamir(), qdp::sha256::from_hex(root_hex), eps_claimed);
    nlohmann::json j;
    j["root"] = root_hex;
    j["eps_claimed"] = eps_claimed;
    j["ratio"] = cfg.audit_ratio;
    j["challenge"] = set;
    std::ofstream out(cfg.out_dir + "/challenge.json", std::ios::binary);
    out << j.dump(2) << "\n";
    std::printf("audit challenge: %zu indices derived from the commitment (Fiat-Shamir)\n",
                set.size());
    return 0;
}

int run_audit_verify(const ExperimentConfig &cfg, const std::string &transcript_path) {
    const std::string path =
        transcript_path.empty() ? cfg.out_dir + "/transcript.json" : transcript_path;
    std::ifstream tf(path);
    if (!tf) {
        std::fprintf(stderr, "audit verify: cannot open %s\n", path.c_str());
        return 1;
    }
    std::ifstream cf(cfg.out_dir + "/commitment.txt");
    if (!cf) {
        std::fprintf(stderr, "audit verify: missing %s/commitment.txt\n", cfg.out_dir.c_str());
        return 1;
    }
    std::string root_hex;
    double eps_claimed = 0.0;
    cf >> root_hex >> eps_claimed;

    nlohmann::json j;
    tf >> j;
    const auto transcript = qdp::harness::transcript_from_json(j);
    if (qdp::sha256::to_hex(transcript.root) != root_hex) {
        std::printf("audit verify: REJECT (transcript root differs from the commitment)\n");
        return 2;
    }
    // Recompute the Fiat-Shamir challenge; the prover does not pick indices.
    const auto expected_set = qdp::audit::challenge(
        static_cast<std::size_t>(cfg.audit_n), cfg.audit_ratio,
        qdp::audit::ChallengeMode::fiat_shamir(), transcript.root, eps_claimed);
    const auto mcfg = cfg.mech_cfg(cfg.gamma_grid.front());
    const auto verdict = qdp::audit::verify(transcript.root, eps_claimed, expected_set,
                                            transcript.responses, mcfg);
    if (verdict.accepted) {
        std::printf("audit verify: ACCEPT (%zu challenges checked)\n", expected_set.size());
        return 0;
    }
    std::printf("audit verify: REJECT\n");
    for (const auto &[idx, reason] : verdict.reject_reasons) {
        std::printf("  index %zu: %s\n", idx, qdp::audit::reject_reason_name(reason));
    }
    return 2;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Geometry-aware quantum differential privacy experiments"};
    app.require_subcommand(1);

    struct Entry {
        const char *name;
        const char *help;
        RunResult (*fn)(const ExperimentConfig &);
    };
    static const std::vector<Entry> entries = {
        {"tradeoff", "privacy-utility sweep and uncertainty audit", qdp::harness::run_tradeoff},
        {"spectrum", "QFI spectra of both embeddings", qdp::harness::run_spectrum},
        {"pareto", "privacy-accuracy frontier on the anisotropic task", qdp::harness::run_pareto},
        {"hwnoise", "hardware-noise regime fidelity table", qdp::harness::run_hw_noise},
        {"compose", "layer composition advantage", qdp::harness::run_composition},
        {"adversary", "evasion, leakage, poisoning, Wasserstein gap", qdp::harness::run_adversary},
        {"adaptive", "online lambda_max tracking", qdp::harness::run_adaptive},
        {"dephasing", "dephasing-angle mutual information", qdp::harness::run_dephasing},
        {"classical", "classical DP baselines at matched noise power",
         qdp::harness::run_classical_baseline},
    };

    std::vector<std::shared_ptr<CommonOpts>> opt_store;
    std::vector<CLI::App *> cmds;
    for (const auto &e : entries) {
        auto opts = std::make_shared<CommonOpts>();
        CLI::App *cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, *opts);
        opt_store.push_back(std::move(opts));
        cmds.push_back(cmd);
    }

    auto all_opts = std::make_shared<CommonOpts>();
    CLI::App *all_cmd = app.add_subcommand("all", "run every experiment");
    add_common(all_cmd, *all_opts);

    auto audit_opts = std::make_shared<CommonOpts>();
    CLI::App *audit_cmd = app.add_subcommand("audit", "verifiable DP audit protocol");
    audit_cmd->require_subcommand(1);
    CLI::App *commit_cmd =
        audit_cmd->add_subcommand("commit", "build records, publish root and transcript");
    CLI::App *challenge_cmd =
        audit_cmd->add_subcommand("challenge", "derive the Fiat-Shamir challenge set");
    CLI::App *verify_cmd = audit_cmd->add_subcommand("verify", "verify a transcript offline");
    std::string transcript_path;
    verify_cmd->add_option("transcript", transcript_path,
                           "transcript JSON (default <out-dir>/transcript.json)");
    for (CLI::App *cmd : {commit_cmd, challenge_cmd, verify_cmd}) {
        add_common(cmd, *audit_opts);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (cmds[i]->parsed()) {
                const ExperimentConfig cfg = resolve_config(*opt_store[i]);
                return finish(entries[i].fn(cfg), cfg, opt_store[i]->check);
            }
        }
        if (all_cmd->parsed()) {
            const ExperimentConfig cfg = resolve_config(*all_opts);
            int rc = 0;
            for (const auto &e : entries) {
                rc = std::max(rc, finish(e.fn(cfg), cfg, all_opts->check));
            }
            rc = std::max(rc, finish(qdp::harness::run_audit(cfg), cfg, all_opts->check));
            return rc;
        }
        if (audit_cmd->parsed()) {
            const ExperimentConfig cfg = resolve_config(*audit_opts);
            if (commit_cmd->parsed()) {
                return run_audit_commit(cfg);
            }
            if (challenge_cmd->parsed()) {
                return run_audit_challenge(cfg);
            }
            if (verify_cmd->parsed()) {
                return run_audit_verify(cfg, transcript_path);
            }
        }
    } catch (const std::exception &ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
