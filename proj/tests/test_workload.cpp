#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "helpers.hpp"

using namespace dagsim;

namespace {

WorldState apply_setup(const GeneratedWorkload& workload) {
    WorldState world;
    for (const auto& call : workload.setup) {
        SimulationResult sim = simulate(call, world);
        REQUIRE(sim.ok);
        apply_writeset_inplace(world, sim.rwset.writes);
    }
    return world;
}

std::size_t count_flagged(const WorkloadConfig& cfg) {
    GeneratedWorkload workload = generate(cfg);
    WorldState world = apply_setup(workload);
    ManualClock clock;
    Endorser endorser({1e12, clock.clock()});
    std::size_t flagged = 0;
    for (const auto& p : workload.proposals) {
        auto r = endorser.endorse(p, world);
        REQUIRE(r.accepted());
        flagged += static_cast<std::size_t>(r.tx->flag);
    }
    return flagged;
}

}  // namespace

TEST_CASE("generation is deterministic per config") {
    WorkloadConfig cfg;
    cfg.tx_count = 200;
    cfg.dependency_ratio = 0.4;
    cfg.seed = 99;

    GeneratedWorkload a = generate(cfg);
    GeneratedWorkload b = generate(cfg);
    REQUIRE(a.proposals.size() == b.proposals.size());
    for (std::size_t i = 0; i < a.proposals.size(); ++i) {
        REQUIRE(a.proposals[i].tx_id == b.proposals[i].tx_id);
        REQUIRE(a.proposals[i].call == b.proposals[i].call);
    }
    REQUIRE(render_replay(cfg, a.proposals) == render_replay(cfg, b.proposals));

    cfg.seed = 100;
    GeneratedWorkload c = generate(cfg);
    bool differs = false;
    for (std::size_t i = 0; i < a.proposals.size() && !differs; ++i)
        differs = !(a.proposals[i].call == c.proposals[i].call);
    REQUIRE(differs);
}

TEST_CASE("dependent slot count is round(ratio * n) and never position 0") {
    for (auto [n, ratio] : std::vector<std::pair<std::size_t, double>>{
             {4, 0.5}, {10, 0.25}, {1000, 0.9}, {7, 1.0}, {50, 0.0}, {1, 1.0}}) {
        WorkloadConfig cfg;
        cfg.tx_count = n;
        cfg.dependency_ratio = ratio;
        GeneratedWorkload w = generate(cfg);

        std::size_t expected = static_cast<std::size_t>(
            std::llround(ratio * static_cast<double>(n)));
        if (expected > n - 1) expected = n - 1;
        REQUIRE(w.dependent_positions.size() == expected);
        for (std::size_t pos : w.dependent_positions) {
            REQUIRE(pos >= 1);
            REQUIRE(pos < n);
        }
    }
}

TEST_CASE("dependents reuse an entity some earlier proposal targeted") {
    for (ContractKind kind :
         {ContractKind::AssetTransfer, ContractKind::Wallet, ContractKind::Voting}) {
        WorkloadConfig cfg;
        cfg.tx_count = 120;
        cfg.dependency_ratio = 0.5;
        cfg.contract = kind;
        cfg.seed = 5;
        GeneratedWorkload w = generate(cfg);

        std::set<std::size_t> dependent(w.dependent_positions.begin(),
                                        w.dependent_positions.end());
        std::set<std::string> earlier;
        for (std::size_t i = 0; i < w.proposals.size(); ++i) {
            const std::string& target = w.proposals[i].call.args[0];
            if (dependent.count(i)) {
                REQUIRE(earlier.count(target) == 1);
            } else {
                REQUIRE(earlier.count(target) == 0);
            }
            earlier.insert(target);
        }
    }
}

TEST_CASE("realized flag count equals the configured ratio when nothing expires") {
    for (ContractKind kind :
         {ContractKind::AssetTransfer, ContractKind::Wallet, ContractKind::Voting}) {
        for (double ratio : {0.0, 0.3, 0.9}) {
            WorkloadConfig cfg;
            cfg.tx_count = 200;
            cfg.dependency_ratio = ratio;
            cfg.contract = kind;
            cfg.seed = 17;
            REQUIRE(count_flagged(cfg) ==
                    static_cast<std::size_t>(std::llround(ratio * 200.0)));
        }
    }
}

TEST_CASE("four-transaction example: two fresh, two dependent") {
    WorkloadConfig cfg;
    cfg.tx_count = 4;
    cfg.dependency_ratio = 0.5;
    cfg.seed = 7;
    REQUIRE(count_flagged(cfg) == 2);
}

TEST_CASE("setup funds every entity with amount times fund_multiple") {
    WorkloadConfig cfg;
    cfg.tx_count = 30;
    cfg.dependency_ratio = 0.4;
    cfg.amount = 25;
    cfg.fund_multiple = 4;
    GeneratedWorkload w = generate(cfg);

    std::set<std::string> entities;
    for (const auto& p : w.proposals) entities.insert(p.call.args[0]);
    REQUIRE(w.setup.size() == entities.size());
    for (const auto& call : w.setup) {
        REQUIRE(call.function == "CreateAsset");
        REQUIRE(call.args[1] == "100");  // 25 * 4
    }

    WorldState world = apply_setup(w);
    REQUIRE(world.entries.size() == entities.size());
}

TEST_CASE("derived setup creates each entity once, in first-appearance order") {
    std::vector<TransactionProposal> proposals;
    proposals.push_back({1, {ContractKind::Wallet, "Withdraw", {"w2", "10"}}, 0});
    proposals.push_back({2, {ContractKind::Wallet, "Transfer", {"w2", "w1", "5"}}, 0});
    proposals.push_back({3, {ContractKind::Wallet, "Open", {"w3", "40"}}, 0});
    proposals.push_back({4, {ContractKind::Wallet, "Deposit", {"w3", "1"}}, 0});

    auto setup = derive_setup(proposals, 10, 3);
    REQUIRE(setup.size() == 2);
    REQUIRE(setup[0].function == "Open");
    REQUIRE(setup[0].args == std::vector<std::string>{"w2", "30"});
    REQUIRE(setup[1].args == std::vector<std::string>{"w1", "30"});
}

TEST_CASE("invalid workload configs are rejected") {
    WorkloadConfig cfg;
    cfg.tx_count = 0;
    REQUIRE_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg.tx_count = 10;
    cfg.dependency_ratio = 1.5;
    REQUIRE_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg.dependency_ratio = 0.5;
    cfg.amount = 0;
    REQUIRE_THROWS_AS(generate(cfg), std::invalid_argument);
}

TEST_CASE("replay text round-trips proposals and config") {
    WorkloadConfig cfg;
    cfg.tx_count = 40;
    cfg.dependency_ratio = 0.3;
    cfg.contract = ContractKind::Voting;
    cfg.seed = 123;
    cfg.amount = 10;
    cfg.fund_multiple = 5;
    GeneratedWorkload w = generate(cfg);

    std::istringstream in(render_replay(cfg, w.proposals));
    ReplayData replay = parse_replay(in);

    REQUIRE(replay.config.tx_count == cfg.tx_count);
    REQUIRE(replay.config.dependency_ratio == cfg.dependency_ratio);
    REQUIRE(replay.config.contract == cfg.contract);
    REQUIRE(replay.config.seed == cfg.seed);
    REQUIRE(replay.config.amount == cfg.amount);
    REQUIRE(replay.config.fund_multiple == cfg.fund_multiple);

    REQUIRE(replay.workload.proposals.size() == w.proposals.size());
    for (std::size_t i = 0; i < w.proposals.size(); ++i) {
        REQUIRE(replay.workload.proposals[i].tx_id == w.proposals[i].tx_id);
        REQUIRE(replay.workload.proposals[i].call == w.proposals[i].call);
    }
    REQUIRE(replay.workload.setup.size() == w.setup.size());
}

TEST_CASE("replay parsing rejects malformed input") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_replay(in);
    };
    REQUIRE_THROWS_AS(parse(""), ReplayFormatError);
    REQUIRE_THROWS_AS(parse("# only a header\n"), ReplayFormatError);
    REQUIRE_THROWS_AS(parse("1\tasset\n"), ReplayFormatError);
    REQUIRE_THROWS_AS(parse("x\tasset\tDeduct\ta0\t10\n"), ReplayFormatError);
    REQUIRE_THROWS_AS(parse("1\tescrow\tDeduct\ta0\t10\n"), ReplayFormatError);
    REQUIRE_THROWS_AS(parse("# tx_count=zebra\n1\tasset\tDeduct\ta0\t10\n"),
                      ReplayFormatError);
}

TEST_CASE("replay files hit disk byte-for-byte") {
    WorkloadConfig cfg;
    cfg.tx_count = 12;
    cfg.seed = 3;
    GeneratedWorkload w = generate(cfg);

    const std::string path = "test_replay_roundtrip.tsv";
    write_replay_file(path, cfg, w.proposals);
    ReplayData replay = load_replay_file(path);
    REQUIRE(replay.workload.proposals.size() == 12);
    REQUIRE(render_replay(replay.config, replay.workload.proposals) ==
            render_replay(cfg, w.proposals));
    std::remove(path.c_str());
}
