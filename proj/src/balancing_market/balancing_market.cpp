#include "src/balancing_market/balancing_market.h"

#include "src/core/errors.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace balancing_market {

namespace {
constexpr double kPropensityFloor = 1e-6;
constexpr double kQuantityEps = 1e-12;
} // namespace

const char* to_string(Direction d) {
    return d == Direction::up ? "up" : "down";
}

const char* to_string(Settlement s) {
    return s == Settlement::pay_as_bid ? "pay_as_bid" : "marginal";
}

Settlement settlement_from_string(const std::string& s) {
    if (s == "pay_as_bid") return Settlement::pay_as_bid;
    if (s == "marginal") return Settlement::marginal;
    throw core::ParseError("unknown settlement rule '" + s + "'");
}

MarkupGrid MarkupGrid::make(int n_strategies) {
    if (n_strategies < 2) throw core::ValidationError("markup grid needs at least 2 strategies");
    MarkupGrid g;
    g.n_strategies = n_strategies;
    g.up.resize(static_cast<size_t>(n_strategies));
    g.down.resize(static_cast<size_t>(n_strategies));
    for (int i = 0; i < n_strategies; ++i) {
        const double x = static_cast<double>(i) / (n_strategies - 1);
        g.up[static_cast<size_t>(i)] = 1.0 + 9.0 * x;
        g.down[static_cast<size_t>(i)] = x;
    }
    return g;
}

AgentState AgentState::make(const std::string& generator_id, int n_strategies) {
    AgentState a;
    a.generator_id = generator_id;
    a.propensities_up.assign(static_cast<size_t>(n_strategies), 1.0);
    a.propensities_down.assign(static_cast<size_t>(n_strategies), 1.0);
    return a;
}

void LearningParams::validate() const {
    if (recency < 0.0 || recency > 1.0) throw core::ValidationError("recency must lie in [0, 1]");
    if (experimentation < 0.0 || experimentation > 1.0)
        throw core::ValidationError("experimentation must lie in [0, 1]");
    if (learning_iterations < 0 || evaluation_iterations < 0)
        throw core::ValidationError("iteration counts must be non-negative");
}

double feasible_quantity(const grid_model::ConventionalGenerator& gen, double g_given_mw, Direction d) {
    if (g_given_mw < gen.g_min - 1e-9 || g_given_mw > gen.g_max + 1e-9)
        throw std::invalid_argument("feasible_quantity: setpoint outside [g_min, g_max] for '" + gen.id + "'");
    const double q = d == Direction::up ? std::min(gen.g_max - g_given_mw, gen.g_ramp)
                                        : std::min(g_given_mw - gen.g_min, gen.g_ramp);
    return std::max(0.0, q);
}

Bid draw_bid(const AgentState& agent, const grid_model::ConventionalGenerator& gen, double g_given_mw, Direction d,
             const MarkupGrid& grid, fluctuations::RngStream& rng) {
    const std::vector<double>& props = agent.propensities(d);
    if (props.size() != static_cast<size_t>(grid.n_strategies))
        throw std::invalid_argument("draw_bid: propensity vector does not match the markup grid");
    double total = 0.0;
    for (double s : props) {
        if (!(s > 0.0)) throw std::invalid_argument("draw_bid: non-positive propensity");
        total += s;
    }
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    int idx = grid.n_strategies - 1;
    for (int i = 0; i < grid.n_strategies; ++i) {
        acc += props[static_cast<size_t>(i)];
        if (u < acc) {
            idx = i;
            break;
        }
    }
    Bid bid;
    bid.agent_index = -1;
    bid.generator_id = gen.id;
    bid.direction = d;
    bid.strategy_index = idx;
    bid.price_eur_mwh = gen.c_prod * grid.markups(d)[static_cast<size_t>(idx)];
    bid.cost_eur_mwh = gen.c_prod;
    bid.quantity_mw = feasible_quantity(gen, g_given_mw, d);
    return bid;
}

MarketSessionResult clear_session(double requirement_mwh, const std::vector<Bid>& bids, Direction d,
                                  Settlement settlement, double interval_hours) {
    if (requirement_mwh < 0.0) throw std::invalid_argument("clear_session: requirement must be non-negative");
    if (!(interval_hours > 0.0)) throw std::invalid_argument("clear_session: interval must be positive");

    MarketSessionResult res;
    res.direction = d;
    res.interval_hours = interval_hours;
    res.requirement_mwh = requirement_mwh;
    int max_agent = -1;
    for (const Bid& b : bids) max_agent = std::max(max_agent, b.agent_index);
    res.agent_profit_eur.assign(static_cast<size_t>(max_agent + 1), 0.0);

    // Both directions clear cheapest-first: the authority procures the
    // requirement at the lowest possible price.
    std::vector<int> order(bids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (bids[static_cast<size_t>(a)].price_eur_mwh != bids[static_cast<size_t>(b)].price_eur_mwh)
            return bids[static_cast<size_t>(a)].price_eur_mwh < bids[static_cast<size_t>(b)].price_eur_mwh;
        return bids[static_cast<size_t>(a)].agent_index < bids[static_cast<size_t>(b)].agent_index;
    });

    double remaining = requirement_mwh;
    std::vector<double> accepted_c_prod;
    for (int oi : order) {
        const Bid& b = bids[static_cast<size_t>(oi)];
        if (b.direction != d) throw std::invalid_argument("clear_session: mixed bid directions");
        if (remaining <= kQuantityEps) break;
        const double offered_mwh = b.quantity_mw * interval_hours;
        if (offered_mwh <= kQuantityEps) continue;
        const double take = std::min(offered_mwh, remaining);
        AcceptedBid acc;
        acc.agent_index = b.agent_index;
        acc.generator_id = b.generator_id;
        acc.quantity_mwh = take;
        acc.paid_eur_mwh = b.price_eur_mwh; // rewritten below under marginal pricing
        acc.strategy_index = b.strategy_index;
        res.accepted.push_back(acc);
        accepted_c_prod.push_back(b.cost_eur_mwh);
        res.cleared_mwh += take;
        res.marginal_price_eur_mwh = b.price_eur_mwh;
        remaining -= take;
    }
    res.shortfall_mwh = std::max(0.0, requirement_mwh - res.cleared_mwh);

    for (size_t i = 0; i < res.accepted.size(); ++i) {
        AcceptedBid& acc = res.accepted[i];
        if (settlement == Settlement::marginal) acc.paid_eur_mwh = res.marginal_price_eur_mwh;
        const double c_prod = accepted_c_prod[i];
        const double margin = d == Direction::up ? acc.paid_eur_mwh - c_prod : c_prod - acc.paid_eur_mwh;
        acc.profit_eur = margin * acc.quantity_mwh;
        res.total_cost_eur += acc.paid_eur_mwh * acc.quantity_mwh;
        if (acc.agent_index >= 0) res.agent_profit_eur[static_cast<size_t>(acc.agent_index)] += acc.profit_eur;
    }
    return res;
}

void roth_erev_update(AgentState& agent, Direction d, int played_index, const SessionOutcome& outcome,
                      const LearningParams& params, const MarkupGrid& grid) {
    std::vector<double>& props = agent.propensities(d);
    const int n = static_cast<int>(props.size());
    if (played_index < 0 || played_index >= n) throw std::invalid_argument("roth_erev_update: bad strategy index");
    const double r = params.recency;
    const double e = params.experimentation;
    const std::vector<double>& markups = grid.markups(d);
    for (int i = 0; i < n; ++i) {
        double& s = props[static_cast<size_t>(i)];
        double reinforcement;
        if (i == played_index && outcome.accepted) {
            reinforcement = outcome.profit_eur;
        } else if (params.legacy_update) {
            reinforcement = e * markups[static_cast<size_t>(i)] / (n - 1);
        } else {
            reinforcement = e * s / (n - 1);
        }
        s = (1.0 - r) * s + reinforcement;
        if (s < kPropensityFloor) s = kPropensityFloor;
    }
}

namespace {

struct SessionRun {
    MarketSessionResult result;
    std::vector<Bid> bids;
    bool ran = false; // false when the mismatch was exactly zero
};

SessionRun run_one_session(const SessionInput& input, const std::vector<AgentState>& agents,
                           const std::vector<const grid_model::ConventionalGenerator*>& generators,
                           const MarkupGrid& grid, const SessionSettings& settings,
                           const fluctuations::RngStream& iter_stream) {
    SessionRun run;
    const Direction d = input.requirement_mw >= 0.0 ? Direction::up : Direction::down;
    const double requirement_mwh = std::abs(input.requirement_mw) * settings.interval_hours;

    run.bids.reserve(agents.size());
    for (size_t a = 0; a < agents.size(); ++a) {
        fluctuations::RngStream bid_rng = iter_stream.child("bid", a);
        Bid bid = draw_bid(agents[a], *generators[a], (*input.g_given_mw)[a], d, grid, bid_rng);
        bid.agent_index = static_cast<int>(a);
        run.bids.push_back(std::move(bid));
    }
    run.result = clear_session(requirement_mwh, run.bids, d, settings.settlement, settings.interval_hours);
    if (settings.post_clear) run.result = settings.post_clear(run.bids, std::move(run.result));
    run.result.config_index = input.config_index;
    if (static_cast<size_t>(run.result.agent_profit_eur.size()) < agents.size())
        run.result.agent_profit_eur.resize(agents.size(), 0.0);
    run.ran = input.requirement_mw != 0.0;
    return run;
}

} // namespace

void run_learning(SessionStream& stream, std::vector<AgentState>& agents,
                  const std::vector<const grid_model::ConventionalGenerator*>& generators, const MarkupGrid& grid,
                  const LearningParams& params, const SessionSettings& settings,
                  const fluctuations::RngStream& cell_stream, std::vector<TrainingTraceEntry>* trace) {
    params.validate();
    if (agents.size() != generators.size()) throw std::invalid_argument("run_learning: agent/generator mismatch");
    for (int iter = 0; iter < params.learning_iterations; ++iter) {
        std::optional<SessionInput> input = stream();
        if (!input) throw std::runtime_error("run_learning: session stream exhausted at iteration " +
                                             std::to_string(iter));
        if (agents.empty()) continue;
        const fluctuations::RngStream iter_stream = cell_stream.child("learn", static_cast<std::uint64_t>(iter));
        SessionRun run = run_one_session(*input, agents, generators, grid, settings, iter_stream);
        const Direction d = run.result.direction;

        for (size_t a = 0; a < agents.size(); ++a) {
            SessionOutcome outcome;
            for (const AcceptedBid& acc : run.result.accepted) {
                if (acc.agent_index == static_cast<int>(a)) {
                    outcome.accepted = true;
                    outcome.profit_eur = run.result.agent_profit_eur[a];
                    break;
                }
            }
            roth_erev_update(agents[a], d, run.bids[a].strategy_index, outcome, params, grid);
        }

        if (trace) {
            TrainingTraceEntry entry;
            entry.direction = d;
            entry.requirement_mwh = run.result.requirement_mwh;
            entry.cleared_mwh = run.result.cleared_mwh;
            entry.cost_eur = run.result.total_cost_eur;
            entry.any_accepted = !run.result.accepted.empty();
            if (entry.any_accepted) {
                double msum = 0.0;
                for (const AcceptedBid& acc : run.result.accepted)
                    msum += grid.markups(d)[static_cast<size_t>(acc.strategy_index)];
                entry.mean_accepted_markup = msum / static_cast<double>(run.result.accepted.size());
            }
            trace->push_back(entry);
        }
    }
}

std::vector<MarketSessionResult> run_evaluation(SessionStream& stream, const std::vector<AgentState>& agents,
                                                const std::vector<const grid_model::ConventionalGenerator*>& generators,
                                                const MarkupGrid& grid, const LearningParams& params,
                                                const SessionSettings& settings,
                                                const fluctuations::RngStream& cell_stream) {
    params.validate();
    if (agents.size() != generators.size()) throw std::invalid_argument("run_evaluation: agent/generator mismatch");
    std::vector<MarketSessionResult> results;
    results.reserve(static_cast<size_t>(params.evaluation_iterations));
    for (int iter = 0; iter < params.evaluation_iterations; ++iter) {
        std::optional<SessionInput> input = stream();
        if (!input) throw std::runtime_error("run_evaluation: session stream exhausted at iteration " +
                                             std::to_string(iter));
        const fluctuations::RngStream iter_stream = cell_stream.child("eval", static_cast<std::uint64_t>(iter));
        if (agents.empty()) {
            MarketSessionResult res;
            res.direction = input->requirement_mw >= 0.0 ? Direction::up : Direction::down;
            res.interval_hours = settings.interval_hours;
            res.requirement_mwh = std::abs(input->requirement_mw) * settings.interval_hours;
            res.shortfall_mwh = res.requirement_mwh;
            res.config_index = input->config_index;
            results.push_back(std::move(res));
            continue;
        }
        SessionRun run = run_one_session(*input, agents, generators, grid, settings, iter_stream);
        results.push_back(std::move(run.result));
    }
    return results;
}

} // namespace balancing_market
