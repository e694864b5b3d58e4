// Agent-based balancing auction: propensity-driven bid construction,
// merit-order clearing by the market authority, and modified Roth-Erev
// propensity learning.
#pragma once

#include "src/fluctuations/rng_stream.h"
#include "src/grid_model/grid_model.h"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace balancing_market {

enum class Direction { up, down };
enum class Settlement { pay_as_bid, marginal };

const char* to_string(Direction d);
const char* to_string(Settlement s);
Settlement settlement_from_string(const std::string& s);

// Discrete markup strategies: N evenly spaced values, endpoints included.
// Upward bids mark production cost up by [1, 10]; downward bids buy back
// energy at [0, 1] times cost.
struct MarkupGrid {
    int n_strategies = 50;
    std::vector<double> up;
    std::vector<double> down;

    static MarkupGrid make(int n_strategies = 50);
    const std::vector<double>& markups(Direction d) const { return d == Direction::up ? up : down; }
};

// Per-agent propensity vectors, one per direction. All start at 1; the
// normalized vector q_i = s_i / sum(s) is the play probability.
struct AgentState {
    std::string generator_id;
    std::vector<double> propensities_up;
    std::vector<double> propensities_down;

    static AgentState make(const std::string& generator_id, int n_strategies);
    std::vector<double>& propensities(Direction d) { return d == Direction::up ? propensities_up : propensities_down; }
    const std::vector<double>& propensities(Direction d) const {
        return d == Direction::up ? propensities_up : propensities_down;
    }
};

struct Bid {
    int agent_index = -1; // position in the session's agent list
    std::string generator_id;
    Direction direction = Direction::up;
    double quantity_mw = 0.0;     // offered power offset, >= 0
    double price_eur_mwh = 0.0;   // c_prod * markup
    double cost_eur_mwh = 0.0;    // the generator's c_prod, used at settlement
    int strategy_index = 0;
};

struct AcceptedBid {
    int agent_index = -1;
    std::string generator_id;
    double quantity_mwh = 0.0;
    double paid_eur_mwh = 0.0;
    double profit_eur = 0.0;
    int strategy_index = 0;
};

struct MarketSessionResult {
    Direction direction = Direction::up;
    long config_index = 0;
    double interval_hours = 1.0;
    double requirement_mwh = 0.0;
    double cleared_mwh = 0.0;
    double total_cost_eur = 0.0;
    double shortfall_mwh = 0.0;
    double marginal_price_eur_mwh = 0.0; // price of the last accepted bid
    std::vector<AcceptedBid> accepted;
    std::vector<double> agent_profit_eur; // per session agent; 0 when rejected
};

struct LearningParams {
    double recency = 0.1;         // r
    double experimentation = 0.2; // e
    int learning_iterations = 3000;
    int evaluation_iterations = 1000;
    // Literal variant of the unplayed/rejected term: e * markup / (N-1)
    // instead of e * propensity / (N-1).
    bool legacy_update = false;

    void validate() const;
};

// Largest power offset the generator can offer around its setpoint:
// up: min(g_max - g_given, g_ramp); down: min(g_given - g_min, g_ramp).
double feasible_quantity(const grid_model::ConventionalGenerator& gen, double g_given_mw, Direction d);

// Sample a strategy from the normalized propensities and build the bid.
Bid draw_bid(const AgentState& agent, const grid_model::ConventionalGenerator& gen, double g_given_mw, Direction d,
             const MarkupGrid& grid, fluctuations::RngStream& rng);

// Merit-order clearing: bids sorted by ascending price (ties by agent
// index), accepted greedily with partial acceptance of the marginal bid.
// Bid quantities are interpreted as MW held for interval_hours, so traded
// energy is quantity * interval_hours. Settlement is pay-as-bid unless
// `marginal` is selected. Shortfall is recorded, never an error.
MarketSessionResult clear_session(double requirement_mwh, const std::vector<Bid>& bids, Direction d,
                                  Settlement settlement = Settlement::pay_as_bid, double interval_hours = 1.0);

struct SessionOutcome {
    bool accepted = false;
    double profit_eur = 0.0;
};

// s_i <- (1-r) s_i + E_i with E_i = profit for the accepted played strategy
// and e * s_i / (N-1) otherwise (markup instead of propensity under
// legacy_update). Propensities are floored at 1e-6.
void roth_erev_update(AgentState& agent, Direction d, int played_index, const SessionOutcome& outcome,
                      const LearningParams& params, const MarkupGrid& grid);

// One market configuration as seen by a zonal session: the signed zonal
// mismatch and the reference setpoint of every session agent.
struct SessionInput {
    double requirement_mw = 0.0; // signed S_k; positive clears the up-market
    const std::vector<double>* g_given_mw = nullptr;
    long config_index = 0;
};

// Yields the next configuration, or nullopt when exhausted.
using SessionStream = std::function<std::optional<SessionInput>()>;

struct SessionSettings {
    Settlement settlement = Settlement::pay_as_bid;
    double interval_hours = 1.0;
    // Optional post-clearing filter (e.g. a network feasibility check); it
    // may re-clear with fewer bids and returns the result to settle on.
    std::function<MarketSessionResult(const std::vector<Bid>&, MarketSessionResult)> post_clear;
};

struct TrainingTraceEntry {
    Direction direction = Direction::up;
    double requirement_mwh = 0.0;
    double cleared_mwh = 0.0;
    double cost_eur = 0.0;
    double mean_accepted_markup = 0.0;
    bool any_accepted = false;
};

// Train agents over params.learning_iterations configurations: draw bids,
// clear the direction picked by the sign of the mismatch, update every
// agent. Throws when the stream runs dry early.
void run_learning(SessionStream& stream, std::vector<AgentState>& agents,
                  const std::vector<const grid_model::ConventionalGenerator*>& generators, const MarkupGrid& grid,
                  const LearningParams& params, const SessionSettings& settings,
                  const fluctuations::RngStream& cell_stream, std::vector<TrainingTraceEntry>* trace = nullptr);

// Clear params.evaluation_iterations configurations with frozen
// propensities (bids are still sampled from them) and collect the results.
std::vector<MarketSessionResult> run_evaluation(SessionStream& stream, const std::vector<AgentState>& agents,
                                                const std::vector<const grid_model::ConventionalGenerator*>& generators,
                                                const MarkupGrid& grid, const LearningParams& params,
                                                const SessionSettings& settings,
                                                const fluctuations::RngStream& cell_stream);

} // namespace balancing_market
