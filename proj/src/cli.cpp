#include "confres/cli.hpp"

#include "confres/cognition.hpp"
#include "confres/energy.hpp"
#include "confres/error.hpp"
#include "confres/evaluation.hpp"
#include "confres/mosaic.hpp"
#include "confres/optimizer.hpp"
#include "confres/resolution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace confres::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(trim(f));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

bool parse_real(const std::string& s, double& v) {
    if (s.empty())
        return false;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && p == end;
}

bool parse_int(const std::string& s, long long& v) {
    if (s.empty())
        return false;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && p == end;
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> data_lines(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::stringstream ss(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(ss, line)) {
        ++no;
        auto t = trim(line);
        if (!t.empty())
            out.emplace_back(no, std::move(t));
    }
    return out;
}

bool all_numeric(const std::vector<std::string>& fields) {
    double v;
    return std::all_of(fields.begin(), fields.end(), [&](const auto& f) { return parse_real(f, v); });
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path);
    out << content;
    if (!out)
        throw InputError("failed writing " + path);
}

void check_output_path(const std::string& path) {
    if (path.empty())
        return;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw InputError("output directory does not exist: " + parent.string());
}

unsigned resolve_threads(int flag) {
    if (flag > 0)
        return static_cast<unsigned>(flag);
    if (flag < 0)
        throw ParameterError("--threads must be non-negative");
    if (const char* env = std::getenv("CONFRES_THREADS"); env && *env) {
        long long v = 0;
        if (!parse_int(trim(env), v) || v < 1)
            throw ParameterError("CONFRES_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Records every option of a command, given or defaulted.
Json resolved_params(const CLI::App& cmd) {
    Json p = Json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || opt->get_lnames().empty())
            continue;
        if (opt->get_type_size() == 0) {
            p[name] = opt->count() > 0;
            continue;
        }
        const auto& res = opt->results();
        const std::string raw = res.empty() ? opt->get_default_str() : res.back();
        const std::string type = opt->get_type_name();
        double real = 0.0;
        long long whole = 0;
        unsigned long long count = 0;
        const char* end = raw.data() + raw.size();
        if (type.rfind("UINT", 0) == 0 && !raw.empty() &&
            std::from_chars(raw.data(), end, count).ptr == end)
            p[name] = count;
        else if (type.rfind("INT", 0) == 0 && parse_int(raw, whole))
            p[name] = whole;
        else if (type.rfind("FLOAT", 0) == 0 && parse_real(raw, real))
            p[name] = real;
        else
            p[name] = raw;
    }
    return p;
}

void apply_config(CLI::App& cmd, const std::string& path) {
    if (path.empty())
        return;
    for (const auto& [key, value] : parse_config(read_file(path))) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = cmd.get_option_no_throw("--" + name);
        if (!opt || name == "config")
            throw InputError("unknown config key '" + key + "' for " + cmd.get_name());
        if (opt->count() > 0)
            continue;  // command line wins
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InputError("config key '" + key + "': " + e.what());
        }
    }
}

struct GraphFlags {
    std::string input;
    std::string edges;
    std::size_t nodes = 0;
    std::size_t k = 10;
    std::string metric = "euclidean";
    std::string kernel = "gaussian";
    std::string scheme = "configuration";
};

void add_graph_flags(CLI::App& cmd, GraphFlags& g) {
    auto* in = cmd.add_option("--input", g.input, "points CSV (n rows, d columns)")
                   ->check(CLI::ExistingFile);
    auto* ed = cmd.add_option("--edges", g.edges, "weighted edge list CSV (i,j,w)")
                   ->check(CLI::ExistingFile);
    in->excludes(ed);
    cmd.add_option("--nodes", g.nodes, "node count for --edges (default: max index + 1)")
        ->capture_default_str();
    cmd.add_option("--k", g.k, "neighbors per item")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--metric", g.metric)->capture_default_str()->check(CLI::IsMember({"euclidean", "cosine"}));
    cmd.add_option("--kernel", g.kernel)->capture_default_str()->check(CLI::IsMember({"gaussian", "inverse"}));
    cmd.add_option("--scheme", g.scheme, "repulsion null model")
        ->capture_default_str()
        ->check(CLI::IsMember({"configuration", "uniform"}));
}

RepulsionScheme scheme_of(const std::string& s) {
    return s == "uniform" ? RepulsionScheme::uniform : RepulsionScheme::configuration_null;
}

GraphOptions graph_options(const GraphFlags& g) {
    GraphOptions o;
    o.k = g.k;
    o.metric = g.metric == "cosine" ? Metric::cosine : Metric::euclidean;
    o.kernel = g.kernel == "inverse" ? Kernel::inverse_distance : Kernel::self_tuning_gaussian;
    o.scheme = scheme_of(g.scheme);
    return o;
}

struct LoadedGraph {
    AffinityGraph graph;
    std::uint64_t hash = 0;
};

LoadedGraph load_graph(const GraphFlags& g, unsigned threads) {
    if (g.input.empty() == g.edges.empty())
        throw InputError("exactly one of --input or --edges is required");
    if (!g.input.empty()) {
        const auto text = read_file(g.input);
        const auto points = parse_points_csv(text);
        if (g.k >= points.size())
            throw ParameterError("--k must be smaller than the number of items (" +
                                 std::to_string(points.size()) + ")");
        return {affinity_from_points(points, graph_options(g), threads), fnv1a64(text)};
    }
    const auto text = read_file(g.edges);
    const auto list = parse_edges_csv(text, g.nodes);
    return {from_edge_list(list.nodes, list.edges, scheme_of(g.scheme)), fnv1a64(text)};
}

Json envelope(const CLI::App& cmd, const std::string& command, std::uint64_t seed, std::uint64_t hash) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["command"] = command;
    j["params"] = resolved_params(cmd);
    j["seed"] = seed;
    j["input_hash"] = hex64(hash);
    return j;
}

void emit(const Json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
}

Json energy_json(const EnergySummary& e) {
    return {{"gamma", e.gamma}, {"h_a", e.h_a}, {"h_r", e.h_r}, {"H", e.H}};
}

std::vector<std::size_t> labels_of(const Partition& p) {
    return {p.labels().begin(), p.labels().end()};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<int> read_prediction(const std::string& path) {
    const auto text = read_file(path);
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext != ".json")
        return parse_labels_csv(text);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw InputError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
        throw InputError(path + ": expected an object with a \"labels\" array");
    std::vector<int> out;
    for (const auto& v : j["labels"]) {
        if (!v.is_number_integer())
            throw InputError(path + ": labels must be integers");
        out.push_back(v.get<int>());
    }
    if (out.empty())
        throw InputError(path + ": no labels");
    return out;
}

std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<bool>& novel) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    const double pos = static_cast<double>(std::count(novel.begin(), novel.end(), true));
    const double neg = static_cast<double>(novel.size()) - pos;
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    double tp = 0, fp = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        (novel[order[r]] ? tp : fp) += 1.0;
        if (r + 1 == order.size() || scores[order[r + 1]] != scores[order[r]])
            pts.emplace_back(fp / neg, tp / pos);
    }
    return pts;
}

Json events_json(const std::vector<ClusterEvent>& events) {
    Json arr = Json::array();
    for (const auto& e : events)
        arr.push_back({{"kind", to_string(e.kind)}, {"sources", e.sources}, {"targets", e.targets}});
    return arr;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PointSet parse_points_csv(const std::string& text) {
    auto lines = data_lines(text);
    if (!lines.empty() && !all_numeric(split_fields(lines.front().second)))
        lines.erase(lines.begin());
    if (lines.empty())
        throw InputError("points file has no data rows");
    std::vector<double> values;
    std::size_t cols = 0;
    for (const auto& [no, line] : lines) {
        const auto fields = split_fields(line);
        if (cols == 0)
            cols = fields.size();
        if (fields.size() != cols)
            throw InputError("line " + std::to_string(no) + ": expected " + std::to_string(cols) +
                             " fields, found " + std::to_string(fields.size()));
        for (const auto& f : fields) {
            double v;
            if (!parse_real(f, v))
                throw InputError("line " + std::to_string(no) + ": not a number: '" + f + "'");
            values.push_back(v);
        }
    }
    return PointSet(lines.size(), cols, std::move(values));
}

std::vector<int> parse_labels_csv(const std::string& text) {
    auto lines = data_lines(text);
    if (!lines.empty()) {
        double v;
        const auto first = split_fields(lines.front().second);
        if (first.size() == 1 && !parse_real(first.front(), v))
            lines.erase(lines.begin());
    }
    if (lines.empty())
        throw InputError("labels file has no data rows");
    std::vector<int> out;
    for (const auto& [no, line] : lines) {
        const auto fields = split_fields(line);
        long long v = 0;
        if (fields.size() != 1)
            throw InputError("line " + std::to_string(no) + ": expected a single label column");
        if (!parse_int(fields.front(), v) || v < INT32_MIN || v > INT32_MAX)
            throw InputError("line " + std::to_string(no) + ": not an integer label: '" +
                             fields.front() + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

EdgeList parse_edges_csv(const std::string& text, std::size_t nodes) {
    auto lines = data_lines(text);
    if (!lines.empty() && !all_numeric(split_fields(lines.front().second)))
        lines.erase(lines.begin());
    if (lines.empty())
        throw InputError("edge file has no data rows");
    EdgeList out;
    std::size_t top = 0;
    for (const auto& [no, line] : lines) {
        const auto f = split_fields(line);
        long long i = 0, j = 0;
        double w = 0;
        if (f.size() != 3 || !parse_int(f[0], i) || !parse_int(f[1], j) || !parse_real(f[2], w))
            throw InputError("line " + std::to_string(no) + ": expected i,j,weight");
        if (i < 0 || j < 0)
            throw InputError("line " + std::to_string(no) + ": negative node index");
        out.edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
        top = std::max({top, static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    }
    out.nodes = std::max(nodes, top + 1);
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(ss, line)) {
        ++no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(no) + ": expected key = value");
        auto key = trim(std::string_view(t).substr(0, eq));
        auto value = trim(std::string_view(t).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw InputError("config line " + std::to_string(no) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Finite-resolution clustering with attraction-repulsion configurations"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    int threads_flag = 0;
    app.add_option("--threads", threads_flag,
                   "worker threads (default: CONFRES_THREADS, else all cores)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster at one resolution");
    GraphFlags cg;
    double c_gamma = 1.0;
    std::uint64_t c_seed = 0;
    std::string c_out, c_config;
    add_graph_flags(*cluster, cg);
    cluster->add_option("--gamma", c_gamma, "resolution")->capture_default_str();
    cluster->add_option("--seed", c_seed)->capture_default_str();
    cluster->add_option("--out", c_out, "partition JSON (default: stdout)");
    cluster->add_option("--config", c_config, "flat key = value file")->check(CLI::ExistingFile);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "find every plateau up to a maximum resolution");
    GraphFlags sg;
    double s_gamma_max = 4.0, s_floor = 1e-4;
    int s_depth = 32;
    std::uint64_t s_seed = 0;
    std::string s_out, s_landscape, s_config;
    add_graph_flags(*sweep, sg);
    sweep->add_option("--gamma-max", s_gamma_max)->capture_default_str();
    sweep->add_option("--width-floor", s_floor, "smallest resolved interval, fraction of gamma-max")
        ->capture_default_str();
    sweep->add_option("--max-depth", s_depth)->capture_default_str();
    sweep->add_option("--seed", s_seed)->capture_default_str();
    sweep->add_option("--out", s_out, "configurations JSON (default: stdout)");
    sweep->add_option("--landscape", s_landscape, "energy landscape CSV");
    sweep->add_option("--config", s_config, "flat key = value file")->check(CLI::ExistingFile);

    // eval
    auto* eval = app.add_subcommand("eval", "compare a partition with reference labels");
    std::string e_pred, e_truth, e_align = "rms", e_mosaic, e_out, e_config, e_layout;
    eval->add_option("--pred", e_pred, "partition JSON or labels CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", e_truth, "labels CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--align", e_align)->capture_default_str()->check(CLI::IsMember({"rms", "none"}));
    eval->add_option("--mosaic", e_mosaic, "mosaic SVG");
    eval->add_option("--layout", e_layout, "mosaic cell geometry CSV");
    eval->add_option("--out", e_out, "metrics JSON (default: stdout)");
    eval->add_option("--config", e_config, "flat key = value file")->check(CLI::ExistingFile);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "synthetic cognition experiments");
    experiment->require_subcommand(1);

    auto* hier = experiment->add_subcommand("hierarchy", "coarse-to-fine plateaus on nested blobs");
    HierarchySpec hs;
    GraphFlags hg;
    double h_gamma_max = 4.0;
    std::string h_out, h_svg, h_csv, h_config;
    hier->add_option("--supers", hs.superordinate_count)->capture_default_str();
    hier->add_option("--basics", hs.basic_per_super, "basic clusters per superordinate")->capture_default_str();
    hier->add_option("--points", hs.points_per_basic, "points per basic cluster")->capture_default_str();
    hier->add_option("--super-sep", hs.super_separation)->capture_default_str();
    hier->add_option("--basic-sep", hs.basic_separation)->capture_default_str();
    hier->add_option("--dim", hs.dimension)->capture_default_str();
    hier->add_option("--noise", hs.noise_sigma)->capture_default_str();
    hier->add_option("--seed", hs.seed)->capture_default_str();
    hier->add_option("--gamma-max", h_gamma_max)->capture_default_str();
    hier->add_option("--k", hg.k)->capture_default_str()->check(CLI::PositiveNumber);
    hier->add_option("--out", h_out, "report JSON (default: stdout)");
    hier->add_option("--svg", h_svg, "ARI-vs-gamma plot");
    hier->add_option("--csv", h_csv, "ARI-vs-gamma table");
    hier->add_option("--config", h_config, "flat key = value file")->check(CLI::ExistingFile);

    auto* nov = experiment->add_subcommand("novelty", "energy scores of uniform outliers among blobs");
    HierarchySpec ns = novelty_blobs();
    GraphFlags ng;
    double n_fraction = 0.05, n_spread = 0.1, n_gamma = 1.0, n_gamma_max = 4.0;
    std::string n_policy = "widest", n_out, n_svg, n_csv, n_config;
    nov->add_option("--fraction", n_fraction, "outlier fraction of the inliers")->capture_default_str();
    nov->add_option("--spread", n_spread, "outlier box widening, fraction of the data range")
        ->capture_default_str();
    nov->add_option("--blobs", ns.basic_per_super)->capture_default_str();
    nov->add_option("--points", ns.points_per_basic, "points per blob")->capture_default_str();
    nov->add_option("--sep", ns.basic_separation, "blob separation")->capture_default_str();
    nov->add_option("--dim", ns.dimension)->capture_default_str();
    nov->add_option("--noise", ns.noise_sigma)->capture_default_str();
    nov->add_option("--seed", ns.seed)->capture_default_str();
    nov->add_option("--policy", n_policy, "widest plateau or fixed gamma")
        ->capture_default_str()
        ->check(CLI::IsMember({"widest", "fixed"}));
    nov->add_option("--gamma", n_gamma, "gamma for --policy fixed")->capture_default_str();
    nov->add_option("--gamma-max", n_gamma_max)->capture_default_str();
    nov->add_option("--k", ng.k)->capture_default_str()->check(CLI::PositiveNumber);
    nov->add_option("--out", n_out, "report JSON (default: stdout)");
    nov->add_option("--svg", n_svg, "ROC curve");
    nov->add_option("--csv", n_csv, "per-item scores");
    nov->add_option("--config", n_config, "flat key = value file")->check(CLI::ExistingFile);

    auto* evo = experiment->add_subcommand("evolve", "split and merge over time");
    EvolutionSpec es;
    GraphFlags eg;
    std::size_t e_split = *es.split_at, e_merge = *es.merge_at;
    bool e_no_split = false, e_no_merge = false;
    double e_threshold = 0.2;
    std::string v_out, v_svg, v_csv, v_config;
    std::string v_methods = "configurations,kmeans";
    evo->add_option("--steps", es.steps)->capture_default_str();
    evo->add_option("--split-at", e_split)->capture_default_str();
    evo->add_option("--merge-at", e_merge)->capture_default_str();
    evo->add_flag("--no-split", e_no_split);
    evo->add_flag("--no-merge", e_no_merge);
    evo->add_option("--groups", es.groups)->capture_default_str();
    evo->add_option("--points", es.points_per_group, "points per group")->capture_default_str();
    evo->add_option("--sep", es.separation)->capture_default_str();
    evo->add_option("--noise", es.noise_sigma)->capture_default_str();
    evo->add_option("--jitter", es.jitter, "per-step displacement noise")->capture_default_str();
    evo->add_option("--seed", es.seed)->capture_default_str();
    evo->add_option("--gamma-max", es.gamma_max)->capture_default_str();
    evo->add_option("--k", eg.k)->capture_default_str()->check(CLI::PositiveNumber);
    evo->add_option("--threshold", e_threshold, "event mass fraction")->capture_default_str();
    evo->add_option("--methods", v_methods, "comma list of configurations, kmeans")->capture_default_str();
    evo->add_option("--out", v_out, "report JSON (default: stdout)");
    evo->add_option("--svg", v_svg, "1/ARI-vs-time plot");
    evo->add_option("--csv", v_csv, "1/ARI-vs-time table");
    evo->add_option("--config", v_config, "flat key = value file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const unsigned threads = resolve_threads(threads_flag);

        if (cluster->parsed()) {
            apply_config(*cluster, c_config);
            check_output_path(c_out);
            auto [graph, hash] = load_graph(cg, threads);
            OptimizeOptions opt;
            opt.seed = c_seed;
            const auto res = optimize(graph, c_gamma, opt);
            Json j = envelope(*cluster, "cluster", c_seed, hash);
            j["n"] = graph.size();
            j["cluster_count"] = res.partition.cluster_count();
            j["labels"] = labels_of(res.partition);
            j["energy"] = energy_json(res.energy);
            emit(j, c_out);
            return kExitOk;
        }

        if (sweep->parsed()) {
            apply_config(*sweep, s_config);
            check_output_path(s_out);
            check_output_path(s_landscape);
            auto [graph, hash] = load_graph(sg, threads);
            SweepOptions so;
            so.optimize.seed = s_seed;
            so.width_floor_fraction = s_floor;
            so.max_depth = s_depth;
            so.threads = threads;
            const auto set = find_configurations(graph, s_gamma_max, so);
            Json j = envelope(*sweep, "sweep", s_seed, hash);
            j["n"] = graph.size();
            j["gamma_max"] = set.gamma_max;
            j["budget_exhausted"] = set.budget_exhausted;
            j["candidates"] = set.candidates.size();
            Json plateaus = Json::array();
            for (const auto& e : set.entries)
                plateaus.push_back({{"lo", e.gamma_lo},
                                    {"hi", e.gamma_hi},
                                    {"k", e.cluster_count},
                                    {"h_a", e.h_a},
                                    {"h_r", e.h_r},
                                    {"labels", labels_of(e.partition)}});
            j["plateaus"] = std::move(plateaus);
            emit(j, s_out);
            if (!s_landscape.empty()) {
                std::string csv = "id,h_a,h_r,lo,hi\n";
                for (std::size_t c = 0; c < set.candidates.size(); ++c) {
                    const auto pt = landscape_point(graph, set.candidates[c]);
                    std::string lo, hi;
                    for (const auto& e : set.entries)
                        if (e.partition == set.candidates[c]) {
                            lo = fmt(e.gamma_lo);
                            hi = fmt(e.gamma_hi);
                        }
                    csv += std::to_string(c) + "," + fmt(pt.h_a) + "," + fmt(pt.h_r) + "," + lo + "," +
                           hi + "\n";
                }
                write_file(s_landscape, csv);
            }
            return kExitOk;
        }

        if (eval->parsed()) {
            apply_config(*eval, e_config);
            check_output_path(e_out);
            check_output_path(e_mosaic);
            check_output_path(e_layout);
            const auto pred = read_prediction(e_pred);
            const auto truth_text = read_file(e_truth);
            const auto truth = parse_labels_csv(truth_text);
            if (pred.size() != truth.size())
                throw InputError("--pred has " + std::to_string(pred.size()) + " labels, --truth has " +
                                 std::to_string(truth.size()));
            const auto table = contingency(truth, pred);
            const auto al = e_align == "rms" ? rms_align(table) : identity_alignment(table);
            const auto hash = fnv1a64(truth_text, fnv1a64(read_file(e_pred)));
            Json j = envelope(*eval, "eval", 0, hash);
            j["n"] = truth.size();
            j["metrics"] = {{"ari", ari(table)},
                            {"nmi", nmi(table)},
                            {"v", v_measure(table)},
                            {"accuracy", accuracy(al)}};
            Json merges = Json::array(), splits = Json::array();
            auto col_ids = [&](const std::vector<std::size_t>& cols) {
                std::vector<int> ids;
                for (auto c : cols)
                    ids.push_back(table.col_ids[c]);
                return ids;
            };
            for (const auto& m : al.merges)
                merges.push_back({{"category", table.row_ids[m.category]}, {"clusters", col_ids(m.clusters)}});
            for (const auto& s : al.splits)
                splits.push_back({{"category", table.row_ids[s.category]}, {"clusters", col_ids(s.clusters)}});
            j["merges"] = std::move(merges);
            j["splits"] = std::move(splits);
            emit(j, e_out);
            if (!e_mosaic.empty() || !e_layout.empty()) {
                const auto lay = layout(al.aligned);
                if (!e_mosaic.empty()) {
                    MosaicStyle style;
                    std::vector<std::string> rows, cols;
                    for (int id : al.aligned.row_ids)
                        rows.push_back("T" + std::to_string(id));
                    for (int id : al.aligned.col_ids)
                        cols.push_back("C" + std::to_string(id));
                    style.row_labels = rows;
                    style.col_labels = cols;
                    write_file(e_mosaic, render_svg(lay, style));
                }
                if (!e_layout.empty())
                    write_file(e_layout, layout_csv(lay));
            }
            return kExitOk;
        }

        if (hier->parsed()) {
            apply_config(*hier, h_config);
            for (const auto* p : {&h_out, &h_svg, &h_csv})
                check_output_path(*p);
            ExperimentOptions eo;
            eo.graph = graph_options(hg);
            eo.sweep.threads = threads;
            const auto r = run_hierarchy_experiment(hs, h_gamma_max, eo);
            const Json params = resolved_params(*hier);
            Json j = envelope(*hier, "experiment hierarchy", hs.seed, fnv1a64(params.dump()));
            auto match = [](const PlateauMatch& m) {
                return Json{{"found", m.found},   {"lo", m.gamma_lo}, {"hi", m.gamma_hi},
                            {"k", m.cluster_count}, {"ari", m.ari}};
            };
            j["superordinate"] = match(r.super_match);
            j["basic"] = match(r.basic_match);
            j["coarse_before_fine"] = r.coarse_before_fine;
            j["budget_exhausted"] = r.configs.budget_exhausted;
            Json plateaus = Json::array();
            std::string csv = "gamma_lo,gamma_hi,k,ari_superordinate,ari_basic\n";
            LineSeries sup{"superordinate", {}, {}}, bas{"basic", {}, {}};
            for (std::size_t p = 0; p < r.super_curve.size(); ++p) {
                const auto& a = r.super_curve[p];
                const auto& b = r.basic_curve[p];
                plateaus.push_back({{"lo", a.gamma_lo}, {"hi", a.gamma_hi}, {"k", a.cluster_count},
                                    {"ari_superordinate", a.ari}, {"ari_basic", b.ari}});
                csv += fmt(a.gamma_lo) + "," + fmt(a.gamma_hi) + "," + std::to_string(a.cluster_count) +
                       "," + fmt(a.ari) + "," + fmt(b.ari) + "\n";
                for (double g : {a.gamma_lo, a.gamma_hi}) {
                    sup.x.push_back(g);
                    sup.y.push_back(a.ari);
                    bas.x.push_back(g);
                    bas.y.push_back(b.ari);
                }
            }
            j["plateaus"] = std::move(plateaus);
            emit(j, h_out);
            if (!h_csv.empty())
                write_file(h_csv, csv);
            if (!h_svg.empty())
                write_file(h_svg, render_line_plot({sup, bas}, "gamma", "ARI", "plateau match by level"));
            return kExitOk;
        }

        if (nov->parsed()) {
            apply_config(*nov, n_config);
            for (const auto* p : {&n_out, &n_svg, &n_csv})
                check_output_path(*p);
            GammaPolicy policy;
            policy.kind = n_policy == "fixed" ? GammaPolicy::Kind::fixed : GammaPolicy::Kind::widest_plateau;
            policy.gamma = n_gamma;
            policy.gamma_max = n_gamma_max;
            NoveltyOptions no;
            no.experiment.graph = graph_options(ng);
            no.experiment.sweep.threads = threads;
            no.spread = n_spread;
            no.outlier_seed = ns.seed;
            const auto r = run_novelty_experiment(ns, n_fraction, policy, no);
            const Json params = resolved_params(*nov);
            Json j = envelope(*nov, "experiment novelty", ns.seed, fnv1a64(params.dump()));
            j["gamma"] = r.gamma;
            j["cluster_count"] = r.cluster_count;
            j["auc"] = r.auc;
            j["mean_novel"] = r.mean_novel;
            j["mean_familiar"] = r.mean_familiar;
            j["items"] = r.items;
            j["novel_items"] = r.novel_items;
            emit(j, n_out);
            if (!n_csv.empty()) {
                std::string csv = "item,score,novel\n";
                for (std::size_t i = 0; i < r.scores.size(); ++i)
                    csv += std::to_string(i) + "," + fmt(r.scores[i]) + "," + (r.novel[i] ? "1" : "0") + "\n";
                write_file(n_csv, csv);
            }
            if (!n_svg.empty()) {
                LineSeries roc{"energy score", {}, {}}, chance{"chance", {0.0, 1.0}, {0.0, 1.0}};
                for (const auto& [x, y] : roc_points(r.scores, r.novel)) {
                    roc.x.push_back(x);
                    roc.y.push_back(y);
                }
                write_file(n_svg, render_line_plot({roc, chance}, "false positive rate",
                                                   "true positive rate", "novelty ROC"));
            }
            return kExitOk;
        }

        if (evo->parsed()) {
            apply_config(*evo, v_config);
            for (const auto* p : {&v_out, &v_svg, &v_csv})
                check_output_path(*p);
            es.split_at = e_no_split ? std::nullopt : std::optional<std::size_t>(e_split);
            es.merge_at = e_no_merge ? std::nullopt : std::optional<std::size_t>(e_merge);
            es.graph = graph_options(eg);
            es.methods.clear();
            std::stringstream ms(v_methods);
            std::string m;
            while (std::getline(ms, m, ',')) {
                m = trim(m);
                if (m == "configurations")
                    es.methods.push_back(Method::configurations);
                else if (m == "kmeans")
                    es.methods.push_back(Method::kmeans);
                else
                    throw ParameterError("unknown method '" + m + "'");
            }
            if (es.methods.empty())
                throw ParameterError("--methods is empty");
            if (!(e_threshold > 0.0 && e_threshold <= 1.0))
                throw ParameterError("--threshold must lie in (0, 1]");
            const auto tr = run_evolution_experiment(es);
            const Json params = resolved_params(*evo);
            Json j = envelope(*evo, "experiment evolve", es.seed, fnv1a64(params.dump()));
            Json sched = Json::array();
            for (const auto& e : tr.events)
                sched.push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"categories", e.categories}});
            j["events"] = std::move(sched);
            Json methods = Json::array();
            std::vector<LineSeries> series;
            for (const auto& mt : tr.methods) {
                Json counts = Json::array(), detected = Json::array();
                for (const auto& p : mt.partitions)
                    counts.push_back(p.cluster_count());
                for (std::size_t t = 0; t + 1 < mt.partitions.size(); ++t)
                    detected.push_back(events_json(detect_events(mt.partitions[t], mt.partitions[t + 1], e_threshold)));
                Json mj = {{"method", to_string(mt.method)},
                           {"mean_inverse_ari", mt.mean_inverse_ari()},
                           {"inverse_ari", mt.inverse_ari},
                           {"cluster_counts", counts},
                           {"detected_events", detected}};
                if (!mt.gammas.empty())
                    mj["gammas"] = mt.gammas;
                methods.push_back(std::move(mj));
                LineSeries s{to_string(mt.method), {}, mt.inverse_ari};
                for (std::size_t t = 1; t <= mt.inverse_ari.size(); ++t)
                    s.x.push_back(static_cast<double>(t));
                series.push_back(std::move(s));
            }
            j["methods"] = std::move(methods);
            emit(j, v_out);
            if (!v_csv.empty()) {
                std::string csv = "t";
                for (const auto& mt : tr.methods)
                    csv += "," + to_string(mt.method);
                csv += "\n";
                for (std::size_t t = 0; t + 1 < tr.steps; ++t) {
                    csv += std::to_string(t + 1);
                    for (const auto& mt : tr.methods)
                        csv += "," + fmt(mt.inverse_ari[t]);
                    csv += "\n";
                }
                write_file(v_csv, csv);
            }
            if (!v_svg.empty())
                write_file(v_svg, render_line_plot(series, "t", "1/ARI", "consecutive-step stability"));
            return kExitOk;
        }
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace confres::cli
