#include "src/grid_model/grid_model.h"

#include "src/core/errors.h"
#include "src/fluctuations/rng_stream.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace grid_model {

using nlohmann::json;

const char* to_string(Technology t) {
    switch (t) {
        case Technology::coal: return "coal";
        case Technology::combined_cycle: return "combined_cycle";
        case Technology::turbogas: return "turbogas";
        case Technology::oil: return "oil";
    }
    return "?";
}

const char* to_string(ResKind k) {
    return k == ResKind::wind ? "wind" : "pv";
}

Technology technology_from_string(const std::string& s) {
    if (s == "coal") return Technology::coal;
    if (s == "combined_cycle") return Technology::combined_cycle;
    if (s == "turbogas") return Technology::turbogas;
    if (s == "oil") return Technology::oil;
    throw core::ParseError("unknown technology '" + s + "'");
}

ResKind res_kind_from_string(const std::string& s) {
    if (s == "wind") return ResKind::wind;
    if (s == "pv") return ResKind::pv;
    throw core::ParseError("unknown RES kind '" + s + "'");
}

double GridScenario::total_load(int t) const {
    double sum = 0.0;
    for (const auto& row : profile.load_mw) sum += row[static_cast<size_t>(t)];
    return sum;
}

double GridScenario::total_res_expected(int t) const {
    double sum = 0.0;
    for (const auto& row : profile.res_mw) sum += row[static_cast<size_t>(t)];
    return sum;
}

namespace {

void check_connected(const GridScenario& s) {
    if (s.buses.size() <= 1) return;
    std::vector<std::vector<int>> adj(s.buses.size());
    for (const auto& br : s.branches) {
        const int a = s.bus_index.at(br.from_bus);
        const int b = s.bus_index.at(br.to_bus);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(s.buses.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    size_t reached = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : adj[static_cast<size_t>(v)]) {
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                ++reached;
                q.push(w);
            }
        }
    }
    if (reached != s.buses.size()) {
        for (size_t i = 0; i < seen.size(); ++i) {
            if (!seen[i])
                throw core::ValidationError("grid is not connected: bus '" + s.buses[i].id +
                                            "' is unreachable from bus '" + s.buses[0].id + "'");
        }
    }
}

} // namespace

void GridScenario::validate() {
    bus_index.clear();
    zone_index.clear();
    generator_index.clear();

    if (meta.base_mva <= 0.0) throw core::ValidationError("meta.base_mva must be positive");
    if (zones.empty()) throw core::ValidationError("scenario needs at least one zone");
    if (buses.empty()) throw core::ValidationError("scenario needs at least one bus");

    for (size_t i = 0; i < zones.size(); ++i) {
        if (zones[i].id.empty()) throw core::ValidationError("zone with empty id");
        if (!zone_index.emplace(zones[i].id, static_cast<int>(i)).second)
            throw core::ValidationError("duplicate zone id '" + zones[i].id + "'");
    }

    int slack_count = 0;
    for (size_t i = 0; i < buses.size(); ++i) {
        const Bus& b = buses[i];
        if (b.id.empty()) throw core::ValidationError("bus with empty id");
        if (!bus_index.emplace(b.id, static_cast<int>(i)).second)
            throw core::ValidationError("duplicate bus id '" + b.id + "'");
        if (!zone_index.count(b.zone_id))
            throw core::ValidationError("bus '" + b.id + "': zone_id '" + b.zone_id + "' does not exist");
        if (b.is_slack) ++slack_count;
    }
    if (slack_count != 1)
        throw core::ValidationError("exactly one slack bus required, found " + std::to_string(slack_count));

    for (const Branch& br : branches) {
        const std::string tag = "branch " + br.from_bus + "-" + br.to_bus;
        if (!bus_index.count(br.from_bus))
            throw core::ValidationError(tag + ": from_bus '" + br.from_bus + "' does not exist");
        if (!bus_index.count(br.to_bus))
            throw core::ValidationError(tag + ": to_bus '" + br.to_bus + "' does not exist");
        if (br.from_bus == br.to_bus) throw core::ValidationError(tag + ": endpoints coincide");
        if (!(br.susceptance > 0.0)) throw core::ValidationError(tag + ": susceptance must be positive");
        if (br.flow_limit < 0.0) throw core::ValidationError(tag + ": flow_limit must be non-negative");
    }
    check_connected(*this);

    for (size_t i = 0; i < generators.size(); ++i) {
        const ConventionalGenerator& g = generators[i];
        if (g.id.empty()) throw core::ValidationError("generator with empty id");
        if (!generator_index.emplace(g.id, static_cast<int>(i)).second)
            throw core::ValidationError("duplicate generator id '" + g.id + "'");
        if (!bus_index.count(g.bus_id))
            throw core::ValidationError("generator '" + g.id + "': bus_id '" + g.bus_id + "' does not exist");
        if (g.g_min < 0.0 || g.g_min > g.g_max)
            throw core::ValidationError("generator '" + g.id + "': need 0 <= g_min <= g_max");
        if (!(g.g_ramp > 0.0)) throw core::ValidationError("generator '" + g.id + "': g_ramp must be positive");
        if (!(g.c_prod > 0.0)) throw core::ValidationError("generator '" + g.id + "': c_prod must be positive");
    }

    std::set<std::string> res_ids;
    for (const ResGenerator& r : res_generators) {
        if (r.id.empty()) throw core::ValidationError("RES generator with empty id");
        if (!res_ids.insert(r.id).second)
            throw core::ValidationError("duplicate RES generator id '" + r.id + "'");
        if (!bus_index.count(r.bus_id))
            throw core::ValidationError("RES generator '" + r.id + "': bus_id '" + r.bus_id + "' does not exist");
        if (r.floor < 0.0 || r.floor > r.capacity)
            throw core::ValidationError("RES generator '" + r.id + "': need 0 <= floor <= capacity");
    }

    std::set<std::string> load_ids;
    for (const LoadPoint& l : loads) {
        if (l.id.empty()) throw core::ValidationError("load with empty id");
        if (!load_ids.insert(l.id).second) throw core::ValidationError("duplicate load id '" + l.id + "'");
        if (!bus_index.count(l.bus_id))
            throw core::ValidationError("load '" + l.id + "': bus_id '" + l.bus_id + "' does not exist");
        if (l.d_min < 0.0 || l.d_min > l.d_max)
            throw core::ValidationError("load '" + l.id + "': need 0 <= d_min <= d_max");
    }

    if (profile.t_count < 1) throw core::ValidationError("profile needs at least one instant");
    if (profile.load_mw.size() != loads.size())
        throw core::ValidationError("profile has " + std::to_string(profile.load_mw.size()) +
                                    " load rows for " + std::to_string(loads.size()) + " loads");
    if (profile.res_mw.size() != res_generators.size())
        throw core::ValidationError("profile has " + std::to_string(profile.res_mw.size()) +
                                    " RES rows for " + std::to_string(res_generators.size()) + " RES generators");

    const double eps = 1e-9;
    for (size_t i = 0; i < loads.size(); ++i) {
        if (profile.load_mw[i].size() != static_cast<size_t>(profile.t_count))
            throw core::ValidationError("load '" + loads[i].id + "': profile length mismatch");
        for (int t = 0; t < profile.t_count; ++t) {
            const double v = profile.load_mw[i][static_cast<size_t>(t)];
            if (v < loads[i].d_min - eps || v > loads[i].d_max + eps)
                throw core::ValidationError("load '" + loads[i].id + "': expectation at t=" + std::to_string(t) +
                                            " outside [d_min, d_max]");
        }
    }
    for (size_t i = 0; i < res_generators.size(); ++i) {
        if (profile.res_mw[i].size() != static_cast<size_t>(profile.t_count))
            throw core::ValidationError("RES generator '" + res_generators[i].id + "': profile length mismatch");
        for (int t = 0; t < profile.t_count; ++t) {
            const double v = profile.res_mw[i][static_cast<size_t>(t)];
            const double tol = eps * std::max(1.0, res_generators[i].capacity);
            if (v < res_generators[i].floor - tol || v > res_generators[i].capacity + tol)
                throw core::ValidationError("RES generator '" + res_generators[i].id + "': expectation at t=" +
                                            std::to_string(t) + " outside [floor, capacity]");
        }
    }

    double g_max_sum = 0.0;
    for (const auto& g : generators) g_max_sum += g.g_max;
    for (int t = 0; t < profile.t_count; ++t) {
        const double load = total_load(t);
        if (load > g_max_sum + 1e-6)
            throw core::ValidationError("infeasible scenario: total load " + std::to_string(load) + " at t=" +
                                        std::to_string(t) + " exceeds total conventional g_max " +
                                        std::to_string(g_max_sum));
    }
}

// ---------------------------------------------------------------------------
// JSON (de)serialization
// ---------------------------------------------------------------------------

namespace {

const json& require(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw core::ParseError(std::string("missing key '") + key + "' in " + where);
    return *it;
}

double require_number(const json& j, const char* key, const char* where) {
    const json& v = require(j, key, where);
    if (!v.is_number()) throw core::ParseError(std::string("key '") + key + "' in " + where + " must be a number");
    return v.get<double>();
}

std::string require_string(const json& j, const char* key, const char* where) {
    const json& v = require(j, key, where);
    if (!v.is_string()) throw core::ParseError(std::string("key '") + key + "' in " + where + " must be a string");
    return v.get<std::string>();
}

} // namespace

GridScenario load_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw core::ParseError(std::string("scenario document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw core::ParseError("scenario document must be a JSON object");

    GridScenario s;
    const json& meta = require(doc, "meta", "document");
    s.meta.name = meta.value("name", std::string("unnamed"));
    s.meta.base_mva = meta.value("base_mva", 100.0);

    for (const json& z : require(doc, "zones", "document")) {
        s.zones.push_back({require_string(z, "id", "zone")});
    }
    for (const json& b : require(doc, "buses", "document")) {
        Bus bus;
        bus.id = require_string(b, "id", "bus");
        bus.zone_id = require_string(b, "zone_id", "bus");
        bus.is_slack = b.value("is_slack", false);
        s.buses.push_back(std::move(bus));
    }
    for (const json& b : require(doc, "branches", "document")) {
        Branch br;
        br.from_bus = require_string(b, "from_bus", "branch");
        br.to_bus = require_string(b, "to_bus", "branch");
        br.susceptance = require_number(b, "susceptance", "branch");
        br.flow_limit = require_number(b, "flow_limit", "branch");
        s.branches.push_back(std::move(br));
    }
    for (const json& g : require(doc, "generators", "document")) {
        ConventionalGenerator gen;
        gen.id = require_string(g, "id", "generator");
        gen.bus_id = require_string(g, "bus_id", "generator");
        gen.technology = technology_from_string(require_string(g, "technology", "generator"));
        gen.g_min = require_number(g, "g_min", "generator");
        gen.g_max = require_number(g, "g_max", "generator");
        gen.g_ramp = require_number(g, "g_ramp", "generator");
        gen.c_prod = require_number(g, "c_prod", "generator");
        s.generators.push_back(std::move(gen));
    }
    for (const json& r : require(doc, "res_generators", "document")) {
        ResGenerator res;
        res.id = require_string(r, "id", "res_generator");
        res.bus_id = require_string(r, "bus_id", "res_generator");
        res.kind = res_kind_from_string(require_string(r, "kind", "res_generator"));
        res.capacity = require_number(r, "capacity", "res_generator");
        res.floor = r.value("floor", 0.0);
        s.res_generators.push_back(std::move(res));
    }

    struct PendingBounds {
        bool has_min = false, has_max = false;
    };
    std::vector<PendingBounds> pending;
    for (const json& l : require(doc, "loads", "document")) {
        LoadPoint load;
        load.id = require_string(l, "id", "load");
        load.bus_id = require_string(l, "bus_id", "load");
        PendingBounds pb;
        if (l.contains("d_min")) {
            load.d_min = require_number(l, "d_min", "load");
            pb.has_min = true;
        }
        if (l.contains("d_max")) {
            load.d_max = require_number(l, "d_max", "load");
            pb.has_max = true;
        }
        pending.push_back(pb);
        s.loads.push_back(std::move(load));
    }

    const json& profile = require(doc, "profile", "document");
    const json& load_rows = require(profile, "load", "profile");
    const json& res_rows = require(profile, "res", "profile");

    int t_count = -1;
    auto fetch_row = [&](const json& rows, const std::string& id, const char* what) {
        auto it = rows.find(id);
        if (it == rows.end())
            throw core::ParseError(std::string("profile is missing a row for ") + what + " '" + id + "'");
        if (!it->is_array()) throw core::ParseError(std::string("profile row for '") + id + "' must be an array");
        std::vector<double> row = it->get<std::vector<double>>();
        if (t_count < 0) t_count = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != t_count)
            throw core::ParseError("profile rows have inconsistent lengths ('" + id + "')");
        return row;
    };
    for (const auto& l : s.loads) s.profile.load_mw.push_back(fetch_row(load_rows, l.id, "load"));
    for (const auto& r : s.res_generators) s.profile.res_mw.push_back(fetch_row(res_rows, r.id, "res_generator"));
    if (t_count < 1) throw core::ParseError("profile holds no rows; at least one load or RES row is required");
    s.profile.t_count = t_count;

    // Default load bounds to the profile envelope when the document omits
    // them: [0.5 * min_t D, 1.5 * max_t D].
    for (size_t i = 0; i < s.loads.size(); ++i) {
        const auto& row = s.profile.load_mw[i];
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        if (!pending[i].has_min) s.loads[i].d_min = 0.5 * *lo;
        if (!pending[i].has_max) s.loads[i].d_max = 1.5 * *hi;
    }

    s.validate();
    return s;
}

GridScenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw core::IoError("cannot open scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string serialize_scenario(const GridScenario& s) {
    json doc;
    doc["meta"] = {{"name", s.meta.name}, {"base_mva", s.meta.base_mva}};
    doc["zones"] = json::array();
    for (const auto& z : s.zones) doc["zones"].push_back({{"id", z.id}});
    doc["buses"] = json::array();
    for (const auto& b : s.buses)
        doc["buses"].push_back({{"id", b.id}, {"zone_id", b.zone_id}, {"is_slack", b.is_slack}});
    doc["branches"] = json::array();
    for (const auto& br : s.branches)
        doc["branches"].push_back({{"from_bus", br.from_bus},
                                   {"to_bus", br.to_bus},
                                   {"susceptance", br.susceptance},
                                   {"flow_limit", br.flow_limit}});
    doc["generators"] = json::array();
    for (const auto& g : s.generators)
        doc["generators"].push_back({{"id", g.id},
                                     {"bus_id", g.bus_id},
                                     {"technology", to_string(g.technology)},
                                     {"g_min", g.g_min},
                                     {"g_max", g.g_max},
                                     {"g_ramp", g.g_ramp},
                                     {"c_prod", g.c_prod}});
    doc["res_generators"] = json::array();
    for (const auto& r : s.res_generators)
        doc["res_generators"].push_back({{"id", r.id},
                                         {"bus_id", r.bus_id},
                                         {"kind", to_string(r.kind)},
                                         {"capacity", r.capacity},
                                         {"floor", r.floor}});
    doc["loads"] = json::array();
    for (const auto& l : s.loads)
        doc["loads"].push_back({{"id", l.id}, {"bus_id", l.bus_id}, {"d_min", l.d_min}, {"d_max", l.d_max}});
    json load_rows = json::object();
    for (size_t i = 0; i < s.loads.size(); ++i) load_rows[s.loads[i].id] = s.profile.load_mw[i];
    json res_rows = json::object();
    for (size_t i = 0; i < s.res_generators.size(); ++i) res_rows[s.res_generators[i].id] = s.profile.res_mw[i];
    doc["profile"] = {{"load", load_rows}, {"res", res_rows}};
    return doc.dump(2) + "\n";
}

void save_scenario_file(const GridScenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw core::IoError("cannot write scenario file '" + path.string() + "'");
    out << serialize_scenario(s);
    if (!out) throw core::IoError("failed writing scenario file '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Synthetic scenarios
// ---------------------------------------------------------------------------

namespace {

// Two-peak daily load shape on [0, 24) hours, max value ~1.
double load_shape(double h) {
    const double morning = 0.30 * std::exp(-0.5 * std::pow((h - 9.75) / 2.0, 2.0));
    const double evening = 0.63 * std::exp(-0.5 * std::pow((h - 18.75) / 2.3, 2.0));
    return 0.34 + morning + evening;
}

// Midday PV bell, exactly zero outside daylight hours.
double pv_shape(double h) {
    const double sunrise = 5.5, sunset = 20.5;
    if (h <= sunrise || h >= sunset) return 0.0;
    const double x = (h - sunrise) / (sunset - sunrise);
    const double v = std::sin(M_PI * x);
    return v * v;
}

} // namespace

GridScenario synthesize_scenario(const SynthesisSpec& spec) {
    if (spec.n_buses < 2) throw core::ValidationError("synthesis needs n_buses >= 2");
    if (spec.n_zones < 1) throw core::ValidationError("synthesis needs n_zones >= 1");
    if (spec.n_zones > spec.n_buses)
        throw core::ValidationError("synthesis needs n_zones <= n_buses");
    if (spec.res_fraction_of_capacity < 0.0 || spec.res_fraction_of_capacity > 1.0)
        throw core::ValidationError("res_fraction_of_capacity must lie in [0, 1]");
    if (spec.t_count < 2) throw core::ValidationError("synthesis needs t_count >= 2");

    fluctuations::RngStream rng = fluctuations::RngStream(spec.seed).child("synth");
    GridScenario s;
    s.meta.name = "synthetic-" + std::to_string(spec.n_buses) + "b" + std::to_string(spec.n_zones) + "z-s" +
                  std::to_string(spec.seed);
    s.meta.base_mva = 100.0;

    const int n = spec.n_buses;
    const int nz = spec.n_zones;
    const int T = spec.t_count;

    for (int z = 0; z < nz; ++z) s.zones.push_back({"Z" + std::to_string(z)});
    // Round-robin bus-to-zone assignment.
    for (int i = 0; i < n; ++i) {
        Bus b;
        b.id = "B" + std::to_string(i);
        b.zone_id = "Z" + std::to_string(i % nz);
        b.is_slack = (i == 0);
        s.buses.push_back(std::move(b));
    }

    // Ring topology plus a few chords keeps the grid connected and meshed.
    auto bus_id = [](int i) { return "B" + std::to_string(i); };
    fluctuations::RngStream topo = rng.child("topology");
    std::set<std::pair<int, int>> used;
    auto add_branch = [&](int a, int b) {
        if (a == b) return;
        const auto key = std::minmax(a, b);
        if (!used.insert(key).second) return;
        Branch br;
        br.from_bus = bus_id(key.first);
        br.to_bus = bus_id(key.second);
        br.susceptance = 4.0 + 8.0 * topo.child("b", used.size()).uniform01();
        br.flow_limit = 0.0; // filled once the peak load is known
        s.branches.push_back(std::move(br));
    };
    if (n == 2) {
        add_branch(0, 1);
    } else {
        for (int i = 0; i < n; ++i) add_branch(i, (i + 1) % n);
        const int chords = std::max(1, n / 4);
        fluctuations::RngStream cs = topo.child("chords");
        int placed = 0, attempts = 0;
        while (placed < chords && attempts < 20 * chords) {
            ++attempts;
            const int a = static_cast<int>(cs.next_u64() % static_cast<std::uint64_t>(n));
            const int b = static_cast<int>(cs.next_u64() % static_cast<std::uint64_t>(n));
            const size_t before = used.size();
            add_branch(a, b);
            if (used.size() > before) ++placed;
        }
    }

    // Loads: a handful of large demand centers on the low-index buses (the
    // zone assignment cycles, so every zone gets some), jittered weights,
    // shared two-peak shape.
    const double peak_total_load = 45.0 * n;
    const int n_loads = std::max(nz, (n * 35 + 99) / 100);
    std::vector<double> weights(static_cast<size_t>(n_loads));
    double weight_sum = 0.0;
    fluctuations::RngStream ls = rng.child("loads");
    for (int i = 0; i < n_loads; ++i) {
        weights[static_cast<size_t>(i)] = 0.7 + 0.6 * ls.child("w", static_cast<std::uint64_t>(i)).uniform01();
        weight_sum += weights[static_cast<size_t>(i)];
    }
    std::vector<double> shape(static_cast<size_t>(T));
    double shape_max = 0.0;
    for (int t = 0; t < T; ++t) {
        shape[static_cast<size_t>(t)] = load_shape(24.0 * t / T);
        shape_max = std::max(shape_max, shape[static_cast<size_t>(t)]);
    }
    for (int i = 0; i < n_loads; ++i) {
        LoadPoint l;
        l.id = "L" + std::to_string(i);
        l.bus_id = bus_id(i);
        const double peak = peak_total_load * weights[static_cast<size_t>(i)] / weight_sum;
        std::vector<double> row(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) row[static_cast<size_t>(t)] = peak * shape[static_cast<size_t>(t)] / shape_max;
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        // feeder rating slightly above the daily peak
        l.d_min = 0.5 * *lo;
        l.d_max = 1.08 * *hi;
        s.loads.push_back(std::move(l));
        s.profile.load_mw.push_back(std::move(row));
    }
    s.profile.t_count = T;

    // Conventional fleet: sized to cover the peak with margin; each zone gets
    // a cheap unit and a fast one first so every zonal market has both ends
    // of the merit order.
    struct TechSpec {
        Technology tech;
        double size_weight, ramp_frac, cost;
    };
    const TechSpec tech_cycle[] = {
        {Technology::coal, 1.7, 0.06, 40.0},
        {Technology::turbogas, 0.9, 1.00, 110.0},
        {Technology::combined_cycle, 1.3, 0.15, 60.0},
        {Technology::oil, 0.7, 1.00, 130.0},
    };
    const int n_conv = std::max(3, (n * 9 + 19) / 20);
    std::vector<int> zone_cursor(static_cast<size_t>(nz), 0); // per-zone bus pick
    std::vector<std::vector<int>> zone_buses(static_cast<size_t>(nz));
    for (int i = 0; i < n; ++i) zone_buses[static_cast<size_t>(i % nz)].push_back(i);
    fluctuations::RngStream gs = rng.child("generators");
    std::vector<double> sizes(static_cast<size_t>(n_conv));
    double size_sum = 0.0;
    std::vector<int> slot_count(static_cast<size_t>(nz), 0);
    for (int k = 0; k < n_conv; ++k) {
        const int zone = k % nz;
        const TechSpec& ts = tech_cycle[slot_count[static_cast<size_t>(zone)]++ % 4];
        const auto& zb = zone_buses[static_cast<size_t>(zone)];
        const int bus = zb[static_cast<size_t>(zone_cursor[static_cast<size_t>(zone)]++ % zb.size())];
        ConventionalGenerator g;
        g.id = "G" + std::to_string(k);
        g.bus_id = bus_id(bus);
        g.technology = ts.tech;
        g.c_prod = ts.cost;
        sizes[static_cast<size_t>(k)] =
            ts.size_weight * (0.85 + 0.30 * gs.child("size", static_cast<std::uint64_t>(k)).uniform01());
        size_sum += sizes[static_cast<size_t>(k)];
        g.g_min = 0.0;
        g.g_ramp = ts.ramp_frac; // rescaled below with g_max
        s.generators.push_back(std::move(g));
    }
    const double fleet_capacity = 1.45 * peak_total_load;
    for (int k = 0; k < n_conv; ++k) {
        auto& g = s.generators[static_cast<size_t>(k)];
        g.g_max = fleet_capacity * sizes[static_cast<size_t>(k)] / size_sum;
        g.g_ramp = std::max(1.0, g.g_ramp * g.g_max);
    }

    // RES fleet: many small wind farms spread over the buses with generous
    // capacity headroom (low capacity factor), one PV plant per zone sized
    // close to its capacity at the midday peak of the reference day.
    if (spec.res_fraction_of_capacity > 0.0) {
        const double res_peak = spec.res_fraction_of_capacity * fleet_capacity;
        const double wind_level = 0.28 * res_peak;
        const double pv_peak = 0.72 * res_peak;

        fluctuations::RngStream ws = rng.child("wind");
        const int n_wind = 4 * n;
        std::vector<double> wshare(static_cast<size_t>(n_wind));
        double wsum = 0.0;
        for (int i = 0; i < n_wind; ++i) {
            wshare[static_cast<size_t>(i)] = 0.7 + 0.6 * ws.child("share", static_cast<std::uint64_t>(i)).uniform01();
            wsum += wshare[static_cast<size_t>(i)];
        }
        for (int i = 0; i < n_wind; ++i) {
            ResGenerator r;
            r.id = "W" + std::to_string(i);
            r.bus_id = bus_id(i % n);
            r.kind = ResKind::wind;
            const double level = wind_level * wshare[static_cast<size_t>(i)] / wsum;
            const double phase = 24.0 * ws.child("phase", static_cast<std::uint64_t>(i)).uniform01();
            std::vector<double> row(static_cast<size_t>(T));
            double peak = 0.0;
            for (int t = 0; t < T; ++t) {
                const double h = 24.0 * t / T;
                row[static_cast<size_t>(t)] = level * (1.0 + 0.18 * std::sin(2.0 * M_PI * (h - phase) / 24.0));
                peak = std::max(peak, row[static_cast<size_t>(t)]);
            }
            r.capacity = peak / 0.20; // typical wind capacity factor: ample headroom
            r.floor = 0.0;
            s.res_generators.push_back(std::move(r));
            s.profile.res_mw.push_back(std::move(row));
        }

        fluctuations::RngStream ps = rng.child("pv");
        std::vector<double> pshare(static_cast<size_t>(nz));
        double psum = 0.0;
        for (int z = 0; z < nz; ++z) {
            pshare[static_cast<size_t>(z)] = 0.7 + 0.6 * ps.child("share", static_cast<std::uint64_t>(z)).uniform01();
            psum += pshare[static_cast<size_t>(z)];
        }
        for (int z = 0; z < nz; ++z) {
            ResGenerator r;
            r.id = "PV" + std::to_string(z);
            const auto& zb = zone_buses[static_cast<size_t>(z)];
            r.bus_id = bus_id(zb[zb.size() / 2]);
            r.kind = ResKind::pv;
            const double amp = pv_peak * pshare[static_cast<size_t>(z)] / psum;
            std::vector<double> row(static_cast<size_t>(T));
            double peak = 0.0;
            for (int t = 0; t < T; ++t) {
                row[static_cast<size_t>(t)] = amp * pv_shape(24.0 * t / T);
                peak = std::max(peak, row[static_cast<size_t>(t)]);
            }
            r.capacity = peak / 0.95; // tight headroom: high shares push PV to its limit
            r.floor = 0.0;
            s.res_generators.push_back(std::move(r));
            s.profile.res_mw.push_back(std::move(row));
        }
    }

    for (auto& br : s.branches) br.flow_limit = 1.5 * peak_total_load;

    s.validate();
    return s;
}

GridScenario scale_res_share(const GridScenario& scenario, double p_percent) {
    if (!(p_percent > 0.0) || p_percent > 1.0)
        throw core::ValidationError("p_percent must lie in (0, 1]");
    if (scenario.res_generators.empty())
        throw core::ValidationError("scale_res_share needs at least one RES generator");

    GridScenario out = scenario;
    const int T = out.profile.t_count;
    for (int t = 0; t < T; ++t) {
        const double load = out.total_load(t);
        const double res = out.total_res_expected(t);
        const double target = p_percent * load;
        if (res <= 0.0) {
            if (target > 0.0)
                throw core::ValidationError("cannot rescale RES share: zero total RES expectation at t=" +
                                            std::to_string(t));
            continue;
        }
        const double factor = target / res;
        for (auto& row : out.profile.res_mw) row[static_cast<size_t>(t)] *= factor;
    }
    // Grow capacities only where a scaled expectation now exceeds them.
    for (size_t i = 0; i < out.res_generators.size(); ++i) {
        double peak = 0.0;
        for (double v : out.profile.res_mw[i]) peak = std::max(peak, v);
        auto& r = out.res_generators[i];
        r.capacity = std::max(r.capacity, peak);
        for (int t = 0; t < T; ++t) {
            if (out.profile.res_mw[i][static_cast<size_t>(t)] < r.floor - 1e-9)
                throw core::ValidationError("RES generator '" + r.id + "': rescaled expectation at t=" +
                                            std::to_string(t) + " falls below its floor");
        }
    }
    out.validate();
    return out;
}

} // namespace grid_model
