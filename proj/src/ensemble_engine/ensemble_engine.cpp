#include "src/ensemble_engine/ensemble_engine.h"

#include "src/core/errors.h"
#include "src/core/hash.h"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ensemble_engine {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (p_percent.empty()) throw core::ValidationError("config needs at least one p_percent value");
    for (double p : p_percent) {
        if (!(p > 0.0) || p > 1.0) throw core::ValidationError("p_percent values must lie in (0, 1]");
    }
    fluctuations.validate();
    learning.validate();
    if (time_stride < 1) throw core::ValidationError("time_stride must be at least 1");
    if (threads < 0) throw core::ValidationError("threads must be non-negative");
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw core::ParseError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw core::ParseError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw core::ParseError("experiment config must be a JSON object");
    reject_unknown_keys(doc, {"seed", "p_percent", "time_stride", "threads", "fluctuations", "learning", "flags"},
                        "config");

    ExperimentConfig cfg;
    if (!doc.contains("seed")) throw core::ParseError("experiment config must set 'seed'");
    cfg.master_seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("p_percent")) cfg.p_percent = doc.at("p_percent").get<std::vector<double>>();
    cfg.time_stride = doc.value("time_stride", cfg.time_stride);
    cfg.threads = doc.value("threads", cfg.threads);

    if (doc.contains("fluctuations")) {
        const json& f = doc.at("fluctuations");
        reject_unknown_keys(f, {"sigma_l", "sigma_pv", "sigma_w", "wind_model", "weibull_shape"}, "fluctuations");
        cfg.fluctuations.sigma_load = f.value("sigma_l", cfg.fluctuations.sigma_load);
        cfg.fluctuations.sigma_pv = f.value("sigma_pv", cfg.fluctuations.sigma_pv);
        cfg.fluctuations.sigma_wind = f.value("sigma_w", cfg.fluctuations.sigma_wind);
        if (f.contains("wind_model"))
            cfg.fluctuations.wind_model = fluctuations::wind_model_from_string(f.at("wind_model").get<std::string>());
        cfg.fluctuations.weibull_shape = f.value("weibull_shape", cfg.fluctuations.weibull_shape);
    }
    if (doc.contains("learning")) {
        const json& l = doc.at("learning");
        reject_unknown_keys(l, {"recency", "experimentation", "learning_iterations", "evaluation_iterations"},
                            "learning");
        cfg.learning.recency = l.value("recency", cfg.learning.recency);
        cfg.learning.experimentation = l.value("experimentation", cfg.learning.experimentation);
        cfg.learning.learning_iterations = l.value("learning_iterations", cfg.learning.learning_iterations);
        cfg.learning.evaluation_iterations = l.value("evaluation_iterations", cfg.learning.evaluation_iterations);
    }
    if (doc.contains("flags")) {
        const json& f = doc.at("flags");
        reject_unknown_keys(f, {"network_check", "settlement", "legacy_update", "independent_members"}, "flags");
        cfg.flags.network_check = f.value("network_check", cfg.flags.network_check);
        if (f.contains("settlement"))
            cfg.flags.settlement = balancing_market::settlement_from_string(f.at("settlement").get<std::string>());
        cfg.flags.legacy_update = f.value("legacy_update", cfg.flags.legacy_update);
        cfg.flags.independent_members = f.value("independent_members", cfg.flags.independent_members);
    }
    cfg.learning.legacy_update = cfg.flags.legacy_update;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw core::IoError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
    json doc;
    doc["seed"] = cfg.master_seed;
    doc["p_percent"] = cfg.p_percent;
    doc["time_stride"] = cfg.time_stride;
    doc["fluctuations"] = {{"sigma_l", cfg.fluctuations.sigma_load},
                           {"sigma_pv", cfg.fluctuations.sigma_pv},
                           {"sigma_w", cfg.fluctuations.sigma_wind},
                           {"wind_model", fluctuations::to_string(cfg.fluctuations.wind_model)},
                           {"weibull_shape", cfg.fluctuations.weibull_shape}};
    doc["learning"] = {{"recency", cfg.learning.recency},
                       {"experimentation", cfg.learning.experimentation},
                       {"learning_iterations", cfg.learning.learning_iterations},
                       {"evaluation_iterations", cfg.learning.evaluation_iterations}};
    doc["flags"] = {{"network_check", cfg.flags.network_check},
                    {"settlement", balancing_market::to_string(cfg.flags.settlement)},
                    {"legacy_update", cfg.flags.legacy_update},
                    {"independent_members", cfg.flags.independent_members}};
    // Thread count deliberately excluded: it must not change results.
    return doc.dump();
}

namespace {

namespace bm = balancing_market;
namespace fl = fluctuations;
namespace gm = grid_model;

int resolve_thread_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("BALANCEMKT_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

struct ZoneLayout {
    std::vector<int> loads;      // load indices in the zone
    std::vector<int> res;        // RES indices in the zone
    std::vector<int> generators; // conventional generator indices (the agents)
};

std::vector<ZoneLayout> build_zone_layout(const gm::GridScenario& s) {
    std::vector<ZoneLayout> zones(s.zones.size());
    auto zone_of_bus = [&](const std::string& bus_id) {
        return s.zone_index.at(s.buses[static_cast<size_t>(s.bus_index.at(bus_id))].zone_id);
    };
    for (size_t i = 0; i < s.loads.size(); ++i)
        zones[static_cast<size_t>(zone_of_bus(s.loads[i].bus_id))].loads.push_back(static_cast<int>(i));
    for (size_t i = 0; i < s.res_generators.size(); ++i)
        zones[static_cast<size_t>(zone_of_bus(s.res_generators[i].bus_id))].res.push_back(static_cast<int>(i));
    for (size_t i = 0; i < s.generators.size(); ++i)
        zones[static_cast<size_t>(zone_of_bus(s.generators[i].bus_id))].generators.push_back(static_cast<int>(i));
    return zones;
}

struct CellOutput {
    std::vector<bm::MarketSessionResult> eval_sessions;
    std::vector<double> signed_requirement_mw; // per evaluation member
    std::vector<int> agent_generator_index;    // session agent -> scenario generator
};

// Signed zonal mismatch of one sampled configuration. Element streams are
// labeled by the global element index (not the zone), so zone-by-zone
// sampling composes to the same full-grid member.
double sample_zone_mismatch(const gm::GridScenario& s, const ZoneLayout& zone, int t, const fl::FluctuationSpec& spec,
                            const fl::RngStream& member_stream) {
    double mismatch = 0.0;
    for (int li : zone.loads) {
        const double ref = s.profile.load_mw[static_cast<size_t>(li)][static_cast<size_t>(t)];
        mismatch += fl::perturbed_load(s, li, t, spec, member_stream) - ref;
    }
    for (int ri : zone.res) {
        const double ref = s.profile.res_mw[static_cast<size_t>(ri)][static_cast<size_t>(t)];
        mismatch -= fl::perturbed_res(s, ri, t, spec, member_stream) - ref;
    }
    return mismatch;
}

// Post-clearing network feasibility filter: apply accepted offsets to the
// realized injections, run a DC flow, and drop the most expensive accepted
// bid until no branch limit is violated.
bm::MarketSessionResult network_filter(const gm::GridScenario& s, const dispatch::SusceptanceSystem& sys,
                                       const dispatch::DispatchResult& ref, const fl::PerturbedState& state,
                                       double requirement_mwh, bm::Direction d, const bm::SessionSettings& settings,
                                       const std::vector<bm::Bid>& bids, bm::MarketSessionResult result) {
    std::vector<char> banned(bids.size(), 0);
    const int n_bus = static_cast<int>(s.buses.size());
    for (;;) {
        Eigen::VectorXd inj = Eigen::VectorXd::Zero(n_bus);
        for (size_t i = 0; i < s.loads.size(); ++i)
            inj(s.bus_index.at(s.loads[i].bus_id)) -= state.load_mw[i];
        for (size_t i = 0; i < s.res_generators.size(); ++i)
            inj(s.bus_index.at(s.res_generators[i].bus_id)) += state.res_mw[i];
        for (size_t k = 0; k < s.generators.size(); ++k)
            inj(s.bus_index.at(s.generators[k].bus_id)) += ref.setpoints_mw[k];
        for (const bm::AcceptedBid& acc : result.accepted) {
            const double offset_mw = acc.quantity_mwh / settings.interval_hours;
            const int gi = s.generator_index.at(acc.generator_id);
            inj(s.bus_index.at(s.generators[static_cast<size_t>(gi)].bus_id)) +=
                d == bm::Direction::up ? offset_mw : -offset_mw;
        }
        const dispatch::PowerFlowResult flow = dispatch::solve_dc_power_flow(sys, inj);
        bool violated = false;
        for (size_t k = 0; k < sys.branches.size(); ++k) {
            if (std::abs(flow.flows_mw(static_cast<long>(k))) > sys.branches[k].flow_limit_mw + 1e-6) {
                violated = true;
                break;
            }
        }
        if (!violated || result.accepted.empty()) return result;
        // Drop the priciest accepted bid and re-clear with the rest.
        const bm::AcceptedBid& worst = result.accepted.back();
        for (size_t i = 0; i < bids.size(); ++i) {
            if (bids[i].agent_index == worst.agent_index) banned[i] = 1;
        }
        std::vector<bm::Bid> remaining;
        for (size_t i = 0; i < bids.size(); ++i) {
            if (!banned[i]) remaining.push_back(bids[i]);
        }
        result = bm::clear_session(requirement_mwh, remaining, d, settings.settlement, settings.interval_hours);
    }
}

CellOutput run_cell(const gm::GridScenario& s, const std::vector<ZoneLayout>& zones, int p_index, int zone_index,
                    int t, const dispatch::DispatchResult& ref, const ExperimentConfig& cfg,
                    const dispatch::SusceptanceSystem* sys, double interval_hours, const fl::RngStream& p_stream) {
    const ZoneLayout& zone = zones[static_cast<size_t>(zone_index)];
    CellOutput out;
    out.agent_generator_index = zone.generators;

    std::vector<const gm::ConventionalGenerator*> gens;
    std::vector<bm::AgentState> agents;
    std::vector<double> g_given;
    const bm::MarkupGrid grid = bm::MarkupGrid::make();
    for (int gi : zone.generators) {
        gens.push_back(&s.generators[static_cast<size_t>(gi)]);
        agents.push_back(bm::AgentState::make(s.generators[static_cast<size_t>(gi)].id, grid.n_strategies));
        g_given.push_back(ref.setpoints_mw[static_cast<size_t>(gi)]);
    }

    const fl::RngStream t_stream = p_stream.child("t", static_cast<std::uint64_t>(t));
    const fl::RngStream cell_stream =
        t_stream.child("market", static_cast<std::uint64_t>(zone_index));

    bm::SessionSettings settings;
    settings.settlement = cfg.flags.settlement;
    settings.interval_hours = interval_hours;

    fl::PerturbedState current_state; // only maintained under --network-check
    if (cfg.flags.network_check) {
        settings.post_clear = [&](const std::vector<bm::Bid>& bids, bm::MarketSessionResult result) {
            return network_filter(s, *sys, ref, current_state, result.requirement_mwh, result.direction, settings,
                                  bids, std::move(result));
        };
    }

    auto member_label = [&](const char* phase, long j) {
        // Pairing: the same member index reuses the same sub-stream label at
        // every instant; the independent_members flag salts the label per
        // instant instead.
        const std::uint64_t salt = cfg.flags.independent_members ? 1000003ull * static_cast<std::uint64_t>(t) : 0ull;
        return t_stream.child(phase, static_cast<std::uint64_t>(j) + salt);
    };

    long learn_iter = 0;
    bm::SessionStream learn_stream = [&]() -> std::optional<bm::SessionInput> {
        if (learn_iter >= cfg.learning.learning_iterations) return std::nullopt;
        const fl::RngStream member = member_label("learn", learn_iter);
        bm::SessionInput input;
        if (cfg.flags.network_check) {
            current_state = fl::perturb(s, t, cfg.fluctuations, member);
            current_state.config_index = learn_iter;
            const dispatch::BalancingRequirement req = dispatch::compute_imbalance(ref, s, current_state);
            input.requirement_mw = req.per_zone_mw[static_cast<size_t>(zone_index)];
        } else {
            input.requirement_mw = sample_zone_mismatch(s, zone, t, cfg.fluctuations, member);
        }
        input.g_given_mw = &g_given;
        input.config_index = learn_iter;
        ++learn_iter;
        return input;
    };
    bm::run_learning(learn_stream, agents, gens, grid, cfg.learning, settings, cell_stream);

    long eval_iter = 0;
    out.signed_requirement_mw.reserve(static_cast<size_t>(cfg.learning.evaluation_iterations));
    bm::SessionStream eval_stream = [&]() -> std::optional<bm::SessionInput> {
        if (eval_iter >= cfg.learning.evaluation_iterations) return std::nullopt;
        const fl::RngStream member = member_label("eval", eval_iter);
        bm::SessionInput input;
        if (cfg.flags.network_check) {
            current_state = fl::perturb(s, t, cfg.fluctuations, member);
            current_state.config_index = eval_iter;
            const dispatch::BalancingRequirement req = dispatch::compute_imbalance(ref, s, current_state);
            input.requirement_mw = req.per_zone_mw[static_cast<size_t>(zone_index)];
        } else {
            input.requirement_mw = sample_zone_mismatch(s, zone, t, cfg.fluctuations, member);
        }
        out.signed_requirement_mw.push_back(input.requirement_mw);
        input.g_given_mw = &g_given;
        input.config_index = eval_iter;
        ++eval_iter;
        return input;
    };
    out.eval_sessions = bm::run_evaluation(eval_stream, agents, gens, grid, cfg.learning, settings, cell_stream);
    return out;
}

} // namespace

ExperimentResults run_experiment(const grid_model::GridScenario& scenario, const ExperimentConfig& cfg) {
    cfg.validate();
    const int T = scenario.profile.t_count;
    std::vector<int> instants;
    for (int t = 0; t < T; t += cfg.time_stride) instants.push_back(t);
    const double interval_hours = 24.0 / T * cfg.time_stride;
    const long members = cfg.learning.evaluation_iterations;
    const int n_zones = static_cast<int>(scenario.zones.size());

    ExperimentResults results;
    results.p_percent = cfg.p_percent;
    for (const auto& z : scenario.zones) results.zone_ids.push_back(z.id);
    results.t_count = T;
    results.time_stride = cfg.time_stride;
    results.interval_hours = interval_hours;
    results.members = members;
    results.master_seed = cfg.master_seed;
    results.config_hash = [&] {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(core::fnv1a64(canonical_config_json(cfg))));
        return std::string(buf);
    }();
    results.wind_model = cfg.fluctuations.wind_model;

    const fl::RngStream master(cfg.master_seed);
    const int n_threads = resolve_thread_count(cfg.threads);

    for (size_t p_idx = 0; p_idx < cfg.p_percent.size(); ++p_idx) {
        const double p = cfg.p_percent[p_idx];
        gm::GridScenario scen_p;
        try {
            scen_p = gm::scale_res_share(scenario, p);
        } catch (const core::ValidationError& e) {
            throw core::ValidationError("p_percent=" + std::to_string(p) + ": " + e.what());
        }
        const std::vector<ZoneLayout> zones = build_zone_layout(scen_p);
        const dispatch::SusceptanceSystem sys = dispatch::build_susceptance(scen_p);

        std::vector<dispatch::DispatchResult> refs;
        refs.reserve(instants.size());
        for (int t : instants) {
            try {
                refs.push_back(dispatch::solve_reference_dispatch(scen_p, t));
            } catch (const core::InfeasibleError& e) {
                throw core::InfeasibleError("p_percent=" + std::to_string(p) + ": " + e.what());
            }
        }

        const fl::RngStream p_stream = master.child("p", p_idx);

        // (zone, t) cells are independent; workers pull from a shared queue
        // and write into per-cell slots, so scheduling cannot change results.
        struct Cell {
            int zone, t_pos;
        };
        std::vector<Cell> cells;
        for (int z = 0; z < n_zones; ++z)
            for (size_t ti = 0; ti < instants.size(); ++ti) cells.push_back({z, static_cast<int>(ti)});
        std::vector<CellOutput> outputs(cells.size());

        std::atomic<size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    const Cell& c = cells[i];
                    outputs[i] = run_cell(scen_p, zones, static_cast<int>(p_idx), c.zone,
                                          instants[static_cast<size_t>(c.t_pos)],
                                          refs[static_cast<size_t>(c.t_pos)], cfg, &sys, interval_hours, p_stream);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        if (n_threads <= 1 || cells.size() <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            const int spawn = std::min<int>(n_threads, static_cast<int>(cells.size()));
            pool.reserve(static_cast<size_t>(spawn));
            for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (first_error) std::rethrow_exception(first_error);

        // Deterministic reduction in cell order.
        results.daily_up_volume_gwh.emplace_back(static_cast<size_t>(members), 0.0);
        results.daily_down_volume_gwh.emplace_back(static_cast<size_t>(members), 0.0);
        results.daily_up_cost_eur.emplace_back(static_cast<size_t>(members), 0.0);
        results.daily_down_cost_eur.emplace_back(static_cast<size_t>(members), 0.0);
        results.tech_profit_eur.push_back({0.0, 0.0, 0.0, 0.0});
        double session_count = 0.0;

        for (size_t ci = 0; ci < cells.size(); ++ci) {
            const Cell& c = cells[ci];
            const CellOutput& out = outputs[ci];
            const int t = instants[static_cast<size_t>(c.t_pos)];
            const int hour = t * 24 / T;
            for (long j = 0; j < members; ++j) {
                const double s_mw = out.signed_requirement_mw[static_cast<size_t>(j)];
                auto& up = results.daily_up_volume_gwh.back()[static_cast<size_t>(j)];
                auto& dn = results.daily_down_volume_gwh.back()[static_cast<size_t>(j)];
                up += std::max(s_mw, 0.0) * interval_hours / 1000.0;
                dn += std::max(-s_mw, 0.0) * interval_hours / 1000.0;

                const bm::MarketSessionResult& sess = out.eval_sessions[static_cast<size_t>(j)];
                if (sess.direction == bm::Direction::up)
                    results.daily_up_cost_eur.back()[static_cast<size_t>(j)] += sess.total_cost_eur;
                else
                    results.daily_down_cost_eur.back()[static_cast<size_t>(j)] += sess.total_cost_eur;

                SessionRecord rec;
                rec.p_index = static_cast<int>(p_idx);
                rec.zone_index = c.zone;
                rec.t = t;
                rec.hour = hour;
                rec.member = j;
                rec.direction = sess.direction;
                rec.requirement_mwh = sess.requirement_mwh;
                rec.cleared_mwh = sess.cleared_mwh;
                rec.cost_eur = sess.total_cost_eur;
                rec.marginal_price_eur_mwh = sess.marginal_price_eur_mwh;
                rec.shortfall_mwh = sess.shortfall_mwh;
                results.sessions.push_back(rec);

                session_count += 1.0;
                for (size_t a = 0; a < out.agent_generator_index.size(); ++a) {
                    const auto tech =
                        scen_p.generators[static_cast<size_t>(out.agent_generator_index[a])].technology;
                    results.tech_profit_eur.back()[static_cast<size_t>(tech)] +=
                        a < sess.agent_profit_eur.size() ? sess.agent_profit_eur[a] : 0.0;
                }
            }
        }
        if (session_count > 0.0) {
            for (double& v : results.tech_profit_eur.back()) v /= session_count;
        }
    }
    return results;
}

std::map<grid_model::Technology, double> aggregate_profit_by_technology(
    const std::vector<balancing_market::MarketSessionResult>& sessions,
    const std::vector<grid_model::ConventionalGenerator>& catalog) {
    std::map<std::string, grid_model::Technology> tech_of;
    for (const auto& g : catalog) tech_of[g.id] = g.technology;
    std::map<grid_model::Technology, double> sums = {{grid_model::Technology::coal, 0.0},
                                                     {grid_model::Technology::combined_cycle, 0.0},
                                                     {grid_model::Technology::turbogas, 0.0},
                                                     {grid_model::Technology::oil, 0.0}};
    for (const auto& sess : sessions) {
        for (const auto& acc : sess.accepted) {
            auto it = tech_of.find(acc.generator_id);
            if (it == tech_of.end())
                throw core::ValidationError("aggregate_profit_by_technology: unknown generator '" +
                                            acc.generator_id + "'");
            sums[it->second] += acc.profit_eur;
        }
    }
    if (!sessions.empty()) {
        for (auto& [tech, v] : sums) v /= static_cast<double>(sessions.size());
    }
    return sums;
}

WindComparison compare_wind_models(const grid_model::GridScenario& scenario, const ExperimentConfig& config) {
    WindComparison cmp;
    ExperimentConfig g = config;
    g.fluctuations.wind_model = fluctuations::WindModel::gaussian;
    ExperimentConfig w = config;
    w.fluctuations.wind_model = fluctuations::WindModel::weibull;
    cmp.gaussian = run_experiment(scenario, g);
    cmp.weibull = run_experiment(scenario, w);
    return cmp;
}

} // namespace ensemble_engine
