#pragma once

// Scenario files (YAML, bus numbers 1-based) and the bundled 6-bus case study.
// Schema reference: scenarios/case6.yaml.

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "gridreduce/simulation.hpp"

namespace gridreduce {

inline constexpr int kScenarioFormatVersion = 1;

struct InitialCondition {
    enum class Mode { equilibrium, explicit_state };
    Mode mode = Mode::equilibrium;
    /// Explicit mode: exactly one of eta / theta is set.
    Vector eta;
    Vector theta;
    /// Empty means zero.
    Vector omega;
    /// Empty means zero, or Q u* in equilibrium mode with the controller on.
    Vector xi;
};

struct ControllerConfig {
    bool enabled = false;
    Vector cost;
    /// Pairs of positions in the generator list.
    std::vector<std::pair<std::size_t, std::size_t>> communication;
};

struct OutputConfig {
    std::string csv;
    std::string svg;
    std::vector<std::string> plots;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct Scenario {
    int format_version = kScenarioFormatVersion;
    std::string name;
    NetworkParameters network;
    InitialCondition initial;
    /// Constant open-loop input; empty means the optimal dispatch u* of the initial loads.
    Vector input;
    std::vector<LoadEvent> events;
    ControllerConfig controller;
    IntegratorConfig integrator;
    OutputConfig output;
};

inline bool operator==(const InitialCondition& a, const InitialCondition& b) {
    return a.mode == b.mode && same_vector(a.eta, b.eta) && same_vector(a.theta, b.theta) &&
           same_vector(a.omega, b.omega) && same_vector(a.xi, b.xi);
}
inline bool operator==(const ControllerConfig& a, const ControllerConfig& b) {
    return a.enabled == b.enabled && same_vector(a.cost, b.cost) && a.communication == b.communication;
}
inline bool operator==(const IntegratorConfig& a, const IntegratorConfig& b) {
    return a.step == b.step && a.horizon == b.horizon && a.cadence == b.cadence && a.method == b.method;
}
inline bool operator==(const Scenario& a, const Scenario& b) {
    return a.format_version == b.format_version && a.name == b.name && a.network == b.network && a.initial == b.initial &&
           same_vector(a.input, b.input) && a.events == b.events && a.controller == b.controller &&
           a.integrator == b.integrator && a.output == b.output;
}

/// Six buses, three generators, three constant-power loads. Loads and
/// voltages are not part of the published data; the loads are chosen so the
/// pre-step equilibrium lies well inside the security region.
inline Scenario builtin_case6() {
    Scenario s;
    s.name = "case6";
    auto& n = s.network;
    n.graph = UndirectedGraph::from_pairs(6, {{0, 1}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 5}, {3, 4}, {4, 5}});
    n.generators = {0, 1, 2};
    n.loads = {3, 4, 5};
    n.inertia = Vector{{4.62, 4.17, 5.10}};
    n.damping = Vector{{1.41, 1.28, 1.72}};
    n.reactance = Vector{{0.25, 0.21, 0.32, 0.26, 0.13, 0.33, 0.22, 0.31, 0.10, 0.50, 0.33}};
    n.voltage = Vector::Ones(6);
    n.load_power = Vector{{-0.6, -0.7, -0.5}};
    n.nominal_frequency = 50.0;
    s.initial.mode = InitialCondition::Mode::equilibrium;
    s.events.push_back({4.0, 0, LoadEvent::Kind::scale, 1.2});
    s.controller.enabled = true;
    s.controller.cost = 0.4 * Vector{{1.0, 1.0 / 2.0, 1.0 / 3.0}};
    s.controller.communication = {{0, 1}, {1, 2}};
    s.integrator.step = 1e-3;
    s.integrator.horizon = 30.0;
    s.integrator.cadence = 1;
    s.output.csv = "case6.csv";
    s.output.svg = "case6.svg";
    s.output.plots = {"frequency", "power"};
    return s;
}

namespace detail {

inline Vector read_vector(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) throw SemanticError(field, "expected a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
        try {
            v[static_cast<Eigen::Index>(i)] = node[i].as<double>();
        } catch (const YAML::Exception&) {
            throw SemanticError(field + "[" + std::to_string(i) + "]", "not a number");
        }
    }
    return v;
}

inline double read_double(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<double>();
    } catch (const YAML::Exception&) {
        throw SemanticError(field, "not a number");
    }
}

inline long long read_int(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<long long>();
    } catch (const YAML::Exception&) {
        throw SemanticError(field, "not an integer");
    }
}

inline YAML::Node require_key(const YAML::Node& parent, const char* key, const std::string& field) {
    const YAML::Node n = parent[key];
    if (!n) throw SemanticError(field, "missing");
    return n;
}

inline std::size_t read_bus(const YAML::Node& node, const std::string& field, std::size_t buses) {
    const auto b = read_int(node, field);
    if (b < 1 || static_cast<std::size_t>(b) > buses) throw SemanticError(field, "bus " + std::to_string(b) + " out of range");
    return static_cast<std::size_t>(b - 1);
}

inline std::vector<std::size_t> read_buses(const YAML::Node& node, const std::string& field, std::size_t buses) {
    if (!node.IsSequence()) throw SemanticError(field, "expected a list of bus numbers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(read_bus(node[i], field + "[" + std::to_string(i) + "]", buses));
    return out;
}

inline void check_vector(const Vector& v, std::size_t expected, bool positive, const std::string& field) {
    if (static_cast<std::size_t>(v.size()) != expected)
        throw SemanticError(field, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw SemanticError(field + "[" + std::to_string(i) + "]", "must be finite");
        if (positive && !(v[i] > 0.0)) throw SemanticError(field + "[" + std::to_string(i) + "]", "must be positive");
    }
}

inline std::size_t position_of(const std::vector<std::size_t>& list, std::size_t bus) {
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] == bus) return i;
    return list.size();
}

}  // namespace detail

/// Checks everything parse_scenario checks on a Scenario built in code.
inline void validate_scenario(const Scenario& s) {
    using detail::check_vector;
    if (s.format_version != kScenarioFormatVersion)
        throw SemanticError("format_version", "unsupported version " + std::to_string(s.format_version));
    const auto& n = s.network;
    const std::size_t ng = n.generators.size();
    const std::size_t nl = n.loads.size();
    if (ng == 0) throw SemanticError("network.generators", "at least one generator required");
    check_vector(n.inertia, ng, true, "network.inertia");
    check_vector(n.damping, ng, true, "network.damping");
    check_vector(n.load_power, nl, false, "network.load_power");
    check_vector(n.reactance, n.graph.edge_count(), true, "network.lines");
    if (n.voltage.size()) check_vector(n.voltage, n.graph.node_count(), true, "network.voltage");
    if (!(n.nominal_frequency > 0.0)) throw SemanticError("network.nominal_frequency", "must be positive");
    try {
        PowerNetwork net(n);
    } catch (const InvalidArgument& e) {
        throw SemanticError("network", e.what());
    }

    const auto& ic = s.initial;
    if (ic.mode == InitialCondition::Mode::explicit_state) {
        if ((ic.eta.size() > 0) == (ic.theta.size() > 0))
            throw SemanticError("initial", "explicit mode needs exactly one of eta or theta");
        if (ic.eta.size()) check_vector(ic.eta, n.graph.edge_count(), false, "initial.eta");
        if (ic.theta.size()) check_vector(ic.theta, n.graph.node_count(), false, "initial.theta");
    } else if (ic.eta.size() || ic.theta.size()) {
        throw SemanticError("initial", "equilibrium mode takes no eta or theta");
    }
    if (ic.omega.size()) check_vector(ic.omega, ng, false, "initial.omega");
    if (ic.xi.size()) check_vector(ic.xi, ng, false, "initial.xi");
    if (s.input.size()) check_vector(s.input, ng, false, "input");

    const auto& c = s.controller;
    if (c.enabled || c.cost.size()) check_vector(c.cost, ng, true, "controller.cost");
    if (c.enabled) {
        std::vector<Edge> edges;
        for (auto [a, b] : c.communication) {
            if (a >= ng || b >= ng) throw SemanticError("controller.communication", "link endpoint is not a generator");
            edges.push_back({a, b});
        }
        try {
            CommunicationGraph g(UndirectedGraph(ng, edges));
        } catch (const InvalidArgument& e) {
            throw SemanticError("controller.communication", e.what());
        }
    }

    const auto& in = s.integrator;
    if (!(in.step > 0.0)) throw SemanticError("integrator.step", "must be positive");
    if (!(in.horizon >= in.step)) throw SemanticError("integrator.horizon", "must be at least one step");
    if (in.cadence == 0) throw SemanticError("integrator.cadence", "must be positive");
    if (in.method != "rk4") throw SemanticError("integrator.method", "only rk4 is supported");

    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const auto& e = s.events[i];
        const std::string f = "events[" + std::to_string(i) + "]";
        if (!(e.time >= 0.0 && e.time <= in.horizon)) throw SemanticError(f + ".time", "outside the simulated horizon");
        if (e.load >= nl) throw SemanticError(f + ".bus", "not a load bus");
        if (!std::isfinite(e.value)) throw SemanticError(f, "change must be finite");
    }
    for (std::size_t i = 0; i < s.output.plots.size(); ++i)
        if (s.output.plots[i].empty()) throw SemanticError("output.plots[" + std::to_string(i) + "]", "empty channel name");
}

namespace detail {

inline Scenario parse_document(const YAML::Node& root) {
    Scenario s;
    s.format_version = static_cast<int>(read_int(require_key(root, "format_version", "format_version"), "format_version"));
    if (root["name"]) s.name = root["name"].as<std::string>();

    const YAML::Node net = require_key(root, "network", "network");
    const auto buses_ll = read_int(require_key(net, "buses", "network.buses"), "network.buses");
    if (buses_ll < 1) throw SemanticError("network.buses", "must be positive");
    const auto buses = static_cast<std::size_t>(buses_ll);
    auto& p = s.network;
    p.generators = read_buses(require_key(net, "generators", "network.generators"), "network.generators", buses);
    p.loads = net["loads"] ? read_buses(net["loads"], "network.loads", buses) : std::vector<std::size_t>{};
    p.inertia = read_vector(require_key(net, "inertia", "network.inertia"), "network.inertia");
    p.damping = read_vector(require_key(net, "damping", "network.damping"), "network.damping");
    p.load_power = net["load_power"] ? read_vector(net["load_power"], "network.load_power") : Vector(0);
    if (net["voltage"]) p.voltage = read_vector(net["voltage"], "network.voltage");
    if (net["nominal_frequency"]) p.nominal_frequency = read_double(net["nominal_frequency"], "network.nominal_frequency");
    const YAML::Node lines = require_key(net, "lines", "network.lines");
    if (!lines.IsSequence()) throw SemanticError("network.lines", "expected a list of [from, to, reactance]");
    std::vector<Edge> edges;
    p.reactance.resize(static_cast<Eigen::Index>(lines.size()));
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const std::string f = "network.lines[" + std::to_string(k) + "]";
        if (!lines[k].IsSequence() || lines[k].size() != 3) throw SemanticError(f, "expected [from, to, reactance]");
        edges.push_back({read_bus(lines[k][0], f, buses), read_bus(lines[k][1], f, buses)});
        p.reactance[static_cast<Eigen::Index>(k)] = read_double(lines[k][2], f);
    }
    try {
        p.graph = UndirectedGraph(buses, std::move(edges));
    } catch (const InvalidArgument& e) {
        throw SemanticError("network.lines", e.what());
    }

    if (const YAML::Node ic = root["initial"]) {
        const std::string mode = ic["mode"] ? ic["mode"].as<std::string>() : "equilibrium";
        if (mode == "equilibrium") s.initial.mode = InitialCondition::Mode::equilibrium;
        else if (mode == "explicit") s.initial.mode = InitialCondition::Mode::explicit_state;
        else throw SemanticError("initial.mode", "expected 'equilibrium' or 'explicit'");
        if (ic["eta"]) s.initial.eta = read_vector(ic["eta"], "initial.eta");
        if (ic["theta"]) s.initial.theta = read_vector(ic["theta"], "initial.theta");
        if (ic["omega"]) s.initial.omega = read_vector(ic["omega"], "initial.omega");
        if (ic["xi"]) s.initial.xi = read_vector(ic["xi"], "initial.xi");
    }
    if (root["input"]) s.input = read_vector(root["input"], "input");

    if (const YAML::Node ev = root["events"]) {
        if (!ev.IsSequence()) throw SemanticError("events", "expected a list");
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const std::string f = "events[" + std::to_string(i) + "]";
            LoadEvent e;
            e.time = read_double(require_key(ev[i], "time", f + ".time"), f + ".time");
            const std::size_t bus = read_bus(require_key(ev[i], "bus", f + ".bus"), f + ".bus", buses);
            e.load = position_of(p.loads, bus);
            if (e.load == p.loads.size()) throw SemanticError(f + ".bus", "bus " + std::to_string(bus + 1) + " is not a load");
            const bool scale = static_cast<bool>(ev[i]["scale"]);
            const bool absolute = static_cast<bool>(ev[i]["absolute"]);
            if (scale == absolute) throw SemanticError(f, "exactly one of 'scale' or 'absolute' required");
            e.kind = scale ? LoadEvent::Kind::scale : LoadEvent::Kind::absolute;
            e.value = read_double(ev[i][scale ? "scale" : "absolute"], f + (scale ? ".scale" : ".absolute"));
            s.events.push_back(e);
        }
    }

    if (const YAML::Node c = root["controller"]) {
        s.controller.enabled = c["enabled"] ? c["enabled"].as<bool>() : false;
        if (c["cost"]) s.controller.cost = read_vector(c["cost"], "controller.cost");
        if (const YAML::Node links = c["communication"]) {
            if (!links.IsSequence()) throw SemanticError("controller.communication", "expected a list of [bus, bus]");
            for (std::size_t i = 0; i < links.size(); ++i) {
                const std::string f = "controller.communication[" + std::to_string(i) + "]";
                if (!links[i].IsSequence() || links[i].size() != 2) throw SemanticError(f, "expected [bus, bus]");
                const auto a = position_of(p.generators, read_bus(links[i][0], f, buses));
                const auto b = position_of(p.generators, read_bus(links[i][1], f, buses));
                if (a == p.generators.size() || b == p.generators.size()) throw SemanticError(f, "endpoint is not a generator bus");
                s.controller.communication.emplace_back(a, b);
            }
        }
    }

    if (const YAML::Node in = root["integrator"]) {
        if (in["step"]) s.integrator.step = read_double(in["step"], "integrator.step");
        if (in["horizon"]) s.integrator.horizon = read_double(in["horizon"], "integrator.horizon");
        if (in["cadence"]) {
            const auto c = read_int(in["cadence"], "integrator.cadence");
            if (c < 1) throw SemanticError("integrator.cadence", "must be positive");
            s.integrator.cadence = static_cast<std::size_t>(c);
        }
        if (in["method"]) s.integrator.method = in["method"].as<std::string>();
    }

    if (const YAML::Node out = root["output"]) {
        if (out["csv"]) s.output.csv = out["csv"].as<std::string>();
        if (out["svg"]) s.output.svg = out["svg"].as<std::string>();
        if (out["plots"]) {
            if (!out["plots"].IsSequence()) throw SemanticError("output.plots", "expected a list of channel names");
            for (const auto& x : out["plots"]) s.output.plots.push_back(x.as<std::string>());
        }
    }

    validate_scenario(s);
    return s;
}

}  // namespace detail

/// Parses and validates scenario text.
inline Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw SyntaxError("syntax error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg, e.mark.line + 1);
    }
    if (!root.IsMap()) throw SyntaxError("scenario must be a mapping of sections", 1);
    try {
        return detail::parse_document(root);
    } catch (const YAML::Exception& e) {
        throw SyntaxError("bad value at line " + std::to_string(e.mark.line + 1) + ": " + e.msg, e.mark.line + 1);
    }
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace detail {

inline void emit_vector(YAML::Emitter& out, const Vector& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (auto x : v) out << x;
    out << YAML::EndSeq;
}

inline void emit_buses(YAML::Emitter& out, const std::vector<std::size_t>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (auto x : v) out << x + 1;
    out << YAML::EndSeq;
}

}  // namespace detail

/// Writes a scenario in the same schema parse_scenario reads; doubles carry 17 significant digits.
inline std::string serialize_scenario(const Scenario& s) {
    using detail::emit_vector;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "format_version" << YAML::Value << s.format_version;
    out << YAML::Key << "name" << YAML::Value << s.name;

    const auto& n = s.network;
    out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "buses" << YAML::Value << n.graph.node_count();
    out << YAML::Key << "generators" << YAML::Value;
    detail::emit_buses(out, n.generators);
    out << YAML::Key << "loads" << YAML::Value;
    detail::emit_buses(out, n.loads);
    out << YAML::Key << "inertia" << YAML::Value;
    emit_vector(out, n.inertia);
    out << YAML::Key << "damping" << YAML::Value;
    emit_vector(out, n.damping);
    out << YAML::Key << "load_power" << YAML::Value;
    emit_vector(out, n.load_power);
    if (n.voltage.size()) {
        out << YAML::Key << "voltage" << YAML::Value;
        emit_vector(out, n.voltage);
    }
    out << YAML::Key << "nominal_frequency" << YAML::Value << n.nominal_frequency;
    out << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
    for (std::size_t k = 0; k < n.graph.edge_count(); ++k) {
        out << YAML::Flow << YAML::BeginSeq << n.graph.edge(k).tail + 1 << n.graph.edge(k).head + 1
            << n.reactance[static_cast<Eigen::Index>(k)] << YAML::EndSeq;
    }
    out << YAML::EndSeq << YAML::EndMap;

    const auto& ic = s.initial;
    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mode" << YAML::Value
        << (ic.mode == InitialCondition::Mode::equilibrium ? "equilibrium" : "explicit");
    for (auto [key, v] : {std::pair{"eta", &ic.eta}, {"theta", &ic.theta}, {"omega", &ic.omega}, {"xi", &ic.xi}}) {
        if (v->size()) {
            out << YAML::Key << key << YAML::Value;
            emit_vector(out, *v);
        }
    }
    out << YAML::EndMap;

    if (s.input.size()) {
        out << YAML::Key << "input" << YAML::Value;
        emit_vector(out, s.input);
    }

    out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : s.events) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "time" << YAML::Value << e.time << YAML::Key << "bus"
            << YAML::Value << n.loads.at(e.load) + 1 << YAML::Key
            << (e.kind == LoadEvent::Kind::scale ? "scale" : "absolute") << YAML::Value << e.value << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "enabled" << YAML::Value << s.controller.enabled;
    if (s.controller.cost.size()) {
        out << YAML::Key << "cost" << YAML::Value;
        emit_vector(out, s.controller.cost);
    }
    out << YAML::Key << "communication" << YAML::Value << YAML::BeginSeq;
    for (auto [a, b] : s.controller.communication)
        out << YAML::Flow << YAML::BeginSeq << n.generators.at(a) + 1 << n.generators.at(b) + 1 << YAML::EndSeq;
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "method" << YAML::Value << s.integrator.method;
    out << YAML::Key << "step" << YAML::Value << s.integrator.step;
    out << YAML::Key << "horizon" << YAML::Value << s.integrator.horizon;
    out << YAML::Key << "cadence" << YAML::Value << s.integrator.cadence;
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "csv" << YAML::Value << s.output.csv;
    out << YAML::Key << "svg" << YAML::Value << s.output.svg;
    out << YAML::Key << "plots" << YAML::Value << YAML::Flow << s.output.plots;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace gridreduce
