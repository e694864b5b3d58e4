// Grid/scenario data model: entities, validation, JSON (de)serialization,
// synthetic scenario generation and renewable-share rescaling.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace grid_model {

enum class Technology { coal, combined_cycle, turbogas, oil };
enum class ResKind { wind, pv };

constexpr int kTechnologyCount = 4;

const char* to_string(Technology t);
const char* to_string(ResKind k);
Technology technology_from_string(const std::string& s);
ResKind res_kind_from_string(const std::string& s);

struct Meta {
    std::string name;
    double base_mva = 100.0;
};

struct Zone {
    std::string id;
};

struct Bus {
    std::string id;
    std::string zone_id;
    bool is_slack = false;
};

struct Branch {
    std::string from_bus;
    std::string to_bus;
    double susceptance = 0.0; // per-unit on meta.base_mva
    double flow_limit = 0.0;  // MW
};

struct ConventionalGenerator {
    std::string id;
    std::string bus_id;
    Technology technology = Technology::coal;
    double g_min = 0.0;  // MW
    double g_max = 0.0;  // MW
    double g_ramp = 0.0; // MW per market interval
    double c_prod = 0.0; // EUR/MWh
};

struct ResGenerator {
    std::string id;
    std::string bus_id;
    ResKind kind = ResKind::wind;
    double capacity = 0.0; // MW
    double floor = 0.0;    // MW
};

struct LoadPoint {
    std::string id;
    std::string bus_id;
    double d_min = 0.0; // MW; defaulted from the profile envelope when absent
    double d_max = 0.0; // MW
};

// Expected values per instant for one reference day. Arrays are aligned with
// GridScenario::loads / ::res_generators.
struct DailyProfile {
    int t_count = 96;
    std::vector<std::vector<double>> load_mw; // [load][t]
    std::vector<std::vector<double>> res_mw;  // [res][t]
};

struct GridScenario {
    Meta meta;
    std::vector<Zone> zones;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<ConventionalGenerator> generators;
    std::vector<ResGenerator> res_generators;
    std::vector<LoadPoint> loads;
    DailyProfile profile;

    // Lookup tables, filled by validate(). The scenario is immutable after
    // construction and safe to share read-only across workers.
    std::unordered_map<std::string, int> bus_index;
    std::unordered_map<std::string, int> zone_index;
    std::unordered_map<std::string, int> generator_index;

    double total_load(int t) const;
    double total_res_expected(int t) const;

    // Checks every invariant; throws core::ValidationError naming the
    // offending entity. Also (re)builds the lookup tables.
    void validate();
};

// Parse and validate a scenario document (JSON text).
GridScenario load_scenario(const std::string& json_text);
GridScenario load_scenario_file(const std::filesystem::path& path);

std::string serialize_scenario(const GridScenario& scenario);
void save_scenario_file(const GridScenario& scenario, const std::filesystem::path& path);

struct SynthesisSpec {
    int n_buses = 20;
    int n_zones = 6;
    double res_fraction_of_capacity = 0.3; // peak RES expectation / total conventional g_max
    std::uint64_t seed = 1;
    int t_count = 96;
};

// Deterministic desk-scale scenario: connected ring-plus-chords grid,
// two-peak daily load, midday PV bell (zero at night), flat slowly varying
// wind. Output always passes validate().
GridScenario synthesize_scenario(const SynthesisSpec& spec);

// Rescale RES expectations so that for every t the total expected RES output
// equals p_percent * L(t), with L(t) the (unchanged) total load. Each
// generator's expectation is multiplied by the same per-instant factor;
// capacities grow only where a scaled expectation would exceed them.
GridScenario scale_res_share(const GridScenario& scenario, double p_percent);

} // namespace grid_model
