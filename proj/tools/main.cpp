// blip — seminorm, convolution, and witness computations on molecular
// measures over concrete groups, with file-based I/O for scripted runs.
//
// Exit codes: 0 success, 1 internal error, 2 precondition violation,
// 64 usage, 65 malformed input file.

#include "blip/lab.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace blip;

enum class Format { Json, Tsv };

struct CommonFlags {
    std::string format;
    bool exact = false;

    Format output_format() const {
        std::string choice = format;
        if (choice.empty()) {
            const char* env = std::getenv("BLIP_FORMAT");
            choice = env ? env : "json";
        }
        if (choice == "json") return Format::Json;
        if (choice == "tsv") return Format::Tsv;
        throw ParseError("unknown output format '" + choice + "' (expected json or tsv)");
    }
};

void add_common(CLI::App* sub, CommonFlags& common) {
    sub->add_option("--format", common.format, "output format: json or tsv")
        ->check(CLI::IsMember({"json", "tsv"}));
    sub->add_flag("--exact", common.exact, "evaluate in exact rational arithmetic");
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ParseError(path + ":" + std::to_string(line) + ": " + e.what());
    }
}

template <ScalarType S>
MolecularMeasure<S> load_measure(const std::string& path, const GroupTag& expected) {
    auto m = measure_from_json<S>(load_json_file(path));
    if (!(m.tag() == expected))
        throw PreconditionError("measure in '" + path + "' lives on " + to_string(m.tag()) +
                                ", not " + to_string(expected));
    return m;
}

void emit(const nlohmann::ordered_json& j, Format format) {
    if (format == Format::Json) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::string out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        out += it.key();
        out += '\t';
        out += it->is_string() ? it->get<std::string>() : it->dump();
        out += '\n';
    }
    std::cout << out;
}

void emit(const ExperimentTable& table, Format format) {
    if (format == Format::Json) std::cout << table.to_json().dump(2) << "\n";
    else std::cout << table.to_tsv();
}

struct Options {
    CommonFlags common;
    std::string group;
    std::string pm;
    std::vector<std::string> pm_list;
    std::string theta;
    std::string measure_path;
    std::string measure2_path;
    std::string function_path;
    std::string element;
    std::vector<std::string> probes;
    std::vector<std::string> seq_paths;
    int jmax = 10;
    int auto_shrink = 0;
    double eps = 0.1;
    std::vector<double> eps_list;
};

template <ScalarType S>
int run_norm(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto delta = make_pseudometric<S>(PmSpec::parse(opt.pm), tag);
    const auto m = load_measure<S>(opt.measure_path, tag);
    emit(norm_report_to_json(blip_norm(m, delta)), opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_convolve(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto m = load_measure<S>(opt.measure_path, tag);
    const auto n = load_measure<S>(opt.measure2_path, tag);
    emit(measure_to_json(convolve(m, n)), opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_example31(const Options& opt) {
    emit(run_example_31<S>(opt.jmax), opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_lemma25(const Options& opt) {
    if constexpr (is_exact_scalar_v<S>) {
        throw ExactUnavailableError("the convolution bound involves sqrt(2); no exact mode");
    } else {
        const GroupTag tag = parse_group(opt.group);
        const auto delta = make_pseudometric<double>(PmSpec::parse(opt.pm), tag);
        const auto m = load_measure<double>(opt.measure_path, tag);
        const auto n = load_measure<double>(opt.measure2_path, tag);
        emit(convolution_bound_to_json(check_lemma_25(m, n, delta)),
             opt.common.output_format());
        return 0;
    }
}

template <ScalarType S>
int run_lemma24(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto delta = make_pseudometric<S>(PmSpec::parse(opt.pm), tag);
    const auto f = sampled_function_from_json<S>(tag, load_json_file(opt.function_path));
    const auto g = normalized_sqrt_map(f);
    const auto membership =
        blip_membership(g, scaled_metric(S(2), sqrt_metric(delta)), S(1));
    nlohmann::ordered_json j;
    j["function"] = sampled_function_to_json(g);
    j["in_blip_2sqrt"] = membership.ok;
    j["max_violation"] = detail::scalar_to_json(membership.max_violation);
    emit(j, opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_sin_probe(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto delta = make_pseudometric<S>(PmSpec::parse(opt.pm), tag);
    const auto v = parse_element<S>(tag, opt.element);
    std::vector<GroupElement<S>> probes;
    if (opt.probes.empty()) {
        probes = default_budget<S>(tag).probes;
    } else {
        for (const auto& text : opt.probes) probes.push_back(parse_element<S>(tag, text));
    }
    const S distortion = distortion_probe(delta, v, probes);
    nlohmann::ordered_json j;
    j["group"] = to_string(tag);
    j["pm"] = delta.description;
    j["v"] = payload_to_json(v);
    j["probes"] = probes.size();
    j["distortion"] = detail::scalar_to_json(distortion);
    emit(j, opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_witness(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto delta = make_pseudometric<S>(PmSpec::parse(opt.pm), tag);
    const auto theta = make_pseudometric<S>(PmSpec::parse(opt.theta), tag);
    const auto report =
        sin_witness(delta, theta, S(scalar_from_string<S>(format_double(opt.eps))),
                    default_budget<S>(tag));
    nlohmann::ordered_json j;
    j["group"] = to_string(tag);
    j["pm"] = delta.description;
    j["theta"] = theta.description;
    j.update(witness_report_to_json(report));
    emit(j, opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_scan(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    std::vector<PmSpec> catalog;
    for (const auto& text : opt.pm_list) catalog.push_back(PmSpec::parse(text));
    const auto theta = make_pseudometric<S>(PmSpec::parse(opt.theta), tag);
    std::vector<S> eps;
    for (double e : opt.eps_list) eps.push_back(S(scalar_from_string<S>(format_double(e))));
    emit(joint_continuity_scan<S>(tag, catalog, theta, eps, default_budget<S>(tag)),
         opt.common.output_format());
    return 0;
}

template <ScalarType S>
int run_demo_separate(const Options& opt) {
    const GroupTag tag = parse_group(opt.group);
    const auto delta = make_pseudometric<S>(PmSpec::parse(opt.pm), tag);
    const auto m = load_measure<S>(opt.measure_path, tag);
    std::vector<MolecularMeasure<S>> sequence;
    for (const auto& path : opt.seq_paths) sequence.push_back(load_measure<S>(path, tag));
    const auto e = identity<S>(tag);
    for (int k = 1; k <= opt.auto_shrink; ++k) {
        GroupElement<S> v = [&] {
            switch (tag.kind) {
                case GroupKind::RealLine: return GroupElement<S>{tag, S(S(1) / S(k))};
                case GroupKind::RealVector: {
                    VectorPayload<S> p(tag.param);
                    for (int i = 0; i < tag.param; ++i) p(i) = S(0);
                    p(0) = S(S(1) / S(k));
                    return GroupElement<S>{tag, std::move(p)};
                }
                case GroupKind::Affine:
                    return GroupElement<S>{tag, AffineMap<S>{S(1), S(S(1) / S(k))}};
                default:
                    throw PreconditionError(
                        "--auto-shrink has no canonical sequence on a discrete group");
            }
        }();
        sequence.push_back(combine<S>({{S(1), point_mass(v)}, {S(-1), point_mass(e)}}));
    }
    if (sequence.empty())
        throw PreconditionError("demo-separate needs --seq files or --auto-shrink");
    emit(separate_continuity_demo(m, delta, sequence), opt.common.output_format());
    return 0;
}

template <int (*FloatRun)(const Options&), int (*ExactRun)(const Options&)>
std::function<int()> dispatcher(const Options& opt) {
    return [&opt]() { return opt.common.exact ? ExactRun(opt) : FloatRun(opt); };
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact seminorm and convolution computations on molecular measures"};
    app.require_subcommand(1);

    Options opt;
    std::function<int()> selected;

    auto* norm = app.add_subcommand("norm", "bounded-Lipschitz seminorm of a measure");
    norm->add_option("--group", opt.group, "group tag")->required();
    norm->add_option("--pm", opt.pm, "pseudometric spec")->required();
    norm->add_option("--measure", opt.measure_path, "measure JSON file")->required();
    add_common(norm, opt.common);
    norm->callback([&] { selected = dispatcher<run_norm<double>, run_norm<Rational>>(opt); });

    auto* conv = app.add_subcommand("convolve", "convolution of two measures");
    conv->add_option("--group", opt.group)->required();
    conv->add_option("--measure", opt.measure_path)->required();
    conv->add_option("--measure2", opt.measure2_path)->required();
    add_common(conv, opt.common);
    conv->callback(
        [&] { selected = dispatcher<run_convolve<double>, run_convolve<Rational>>(opt); });

    auto* ex31 = app.add_subcommand("example31", "the diverging-norms example table");
    ex31->add_option("--jmax", opt.jmax, "largest index j")->required();
    add_common(ex31, opt.common);
    ex31->callback(
        [&] { selected = dispatcher<run_example31<double>, run_example31<Rational>>(opt); });

    auto* l25 = app.add_subcommand("lemma25", "convolution seminorm bound check");
    l25->add_option("--group", opt.group)->required();
    l25->add_option("--pm", opt.pm, "bi-invariant pseudometric spec")->required();
    l25->add_option("--measure", opt.measure_path)->required();
    l25->add_option("--measure2", opt.measure2_path)->required();
    add_common(l25, opt.common);
    l25->callback(
        [&] { selected = dispatcher<run_lemma25<double>, run_lemma25<Rational>>(opt); });

    auto* l24 = app.add_subcommand("lemma24", "normalized square-root map membership check");
    l24->add_option("--group", opt.group)->required();
    l24->add_option("--pm", opt.pm)->required();
    l24->add_option("--function", opt.function_path, "sampled-function JSON file")->required();
    add_common(l24, opt.common);
    l24->callback(
        [&] { selected = dispatcher<run_lemma24<double>, run_lemma24<Rational>>(opt); });

    auto* probe = app.add_subcommand("sin-probe", "conjugation distortion over probe points");
    probe->add_option("--group", opt.group)->required();
    probe->add_option("--pm", opt.pm)->required();
    probe->add_option("--v", opt.element, "element whose conjugates are probed")->required();
    probe->add_option("--probe", opt.probes, "probe element (repeatable; default grid if omitted)");
    add_common(probe, opt.common);
    probe->callback(
        [&] { selected = dispatcher<run_sin_probe<double>, run_sin_probe<Rational>>(opt); });

    auto* wit = app.add_subcommand("witness", "discontinuity witness search");
    wit->add_option("--group", opt.group)->required();
    wit->add_option("--pm", opt.pm, "neighbourhood pseudometric Δ")->required();
    wit->add_option("--theta", opt.theta, "target pseudometric Θ")->required();
    wit->add_option("--eps", opt.eps, "neighbourhood radius ε")->required();
    add_common(wit, opt.common);
    wit->callback(
        [&] { selected = dispatcher<run_witness<double>, run_witness<Rational>>(opt); });

    auto* scan = app.add_subcommand("scan", "witness search over a catalog × ε grid");
    scan->add_option("--group", opt.group)->required();
    scan->add_option("--pm", opt.pm_list, "catalog pseudometric spec (repeatable)")->required();
    scan->add_option("--theta", opt.theta)->required();
    scan->add_option("--eps", opt.eps_list, "ε value (repeatable)")->required();
    add_common(scan, opt.common);
    scan->callback([&] { selected = dispatcher<run_scan<double>, run_scan<Rational>>(opt); });

    auto* demo = app.add_subcommand("demo-separate", "separate-continuity bound table");
    demo->add_option("--group", opt.group)->required();
    demo->add_option("--pm", opt.pm)->required();
    demo->add_option("--measure", opt.measure_path, "positive measure JSON file")->required();
    demo->add_option("--seq", opt.seq_paths, "sequence measure JSON file (repeatable)");
    demo->add_option("--auto-shrink", opt.auto_shrink,
                     "append the canonical shrinking pair sequence of this length");
    add_common(demo, opt.common);
    demo->callback([&] {
        selected = dispatcher<run_demo_separate<double>, run_demo_separate<Rational>>(opt);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        return selected();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 65;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
