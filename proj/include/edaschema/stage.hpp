#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eda {

// Canonical stage order of the physical design flow.
enum class Stage {
    floorplan = 0,
    global_place,
    place_resize,
    detailed_place,
    cts,
    global_route,
    detailed_route,
    final_stage,
};

inline constexpr std::array<Stage, 8> kStageOrder = {
    Stage::floorplan,     Stage::global_place, Stage::place_resize,
    Stage::detailed_place, Stage::cts,          Stage::global_route,
    Stage::detailed_route, Stage::final_stage,
};

inline std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::floorplan: return "floorplan";
        case Stage::global_place: return "global_place";
        case Stage::place_resize: return "place_resize";
        case Stage::detailed_place: return "detailed_place";
        case Stage::cts: return "cts";
        case Stage::global_route: return "global_route";
        case Stage::detailed_route: return "detailed_route";
        case Stage::final_stage: return "final";
    }
    return "?";
}

inline std::optional<Stage> stage_from_name(std::string_view name) {
    for (Stage s : kStageOrder)
        if (stage_name(s) == name) return s;
    return std::nullopt;
}

inline Stage stage_from_name_or_throw(std::string_view name) {
    auto s = stage_from_name(name);
    if (!s) throw std::invalid_argument("unknown stage: " + std::string(name));
    return *s;
}

// Stage availability window for an attribute, inclusive on both ends.
struct StageWindow {
    Stage first = Stage::floorplan;
    Stage last = Stage::final_stage;

    bool covers(Stage s) const { return s >= first && s <= last; }
};

// Availability windows for attribute groups. Abbreviations follow the
// flow: FP, GP, PR, DP, CTS, GR, DR, F.
namespace window {
inline constexpr StageWindow fp_f{Stage::floorplan, Stage::final_stage};
inline constexpr StageWindow gp_f{Stage::global_place, Stage::final_stage};
inline constexpr StageWindow cts_f{Stage::cts, Stage::final_stage};
inline constexpr StageWindow dr_f{Stage::detailed_route, Stage::final_stage};
inline constexpr StageWindow f_only{Stage::final_stage, Stage::final_stage};

// Placement boxes on gates, pins, nets, ports.
inline constexpr StageWindow placement = gp_f;
// Per-net routed length, SPEF parasitics, routing maps, RUDY maps,
// IR-drop and EM heatmaps.
inline constexpr StageWindow routed = dr_f;
// Clock tree counts and clock placement maps.
inline constexpr StageWindow clock_tree = cts_f;
// PDN strap geometry and voltage-source locations.
inline constexpr StageWindow pdn_geometry = fp_f;
// Filler placement map exists only in the final layout.
inline constexpr StageWindow filler_map = f_only;
}  // namespace window

}  // namespace eda
