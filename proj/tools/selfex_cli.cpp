// selfex: command-line front end for the self-explanation engine.
//
// Exit codes: 0 success, 1 model validation failure, 2 configuration error,
// 3 provider error.

#include <selfex/eval/question_bank.hpp>
#include <selfex/eval/reports.hpp>
#include <selfex/eval/run_log.hpp>
#include <selfex/eval/studies.hpp>
#include <selfex/service/config.hpp>
#include <selfex/service/record_store.hpp>
#include <selfex/service/service.hpp>
#include <selfex/tmk/dot.hpp>
#include <selfex/tmk/json_io.hpp>
#include <selfex/tmk/layers.hpp>
#include <selfex/tmk/validate.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace selfex;

namespace {

enum Exit { ok = 0, invalid_model = 1, config_error = 2, provider_error = 3 };

// Options shared by every command that needs a pipeline.
struct PipelineArgs {
    std::string config;
    std::string model;
    std::string mock;
    std::optional<int> level;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
    cmd->add_option("-c,--config", a.config, "Service config file (JSON)");
    cmd->add_option("-m,--model", a.model, "Model file; overrides the config");
    cmd->add_option("--mock", a.mock, "Scripted mock provider file; overrides the config");
    cmd->add_option("-l,--level", a.level, "Degradation level 0..6")->check(CLI::Range(0, 6));
}

service::ServiceConfig resolve_config(const PipelineArgs& a) {
    service::ServiceConfig c;
    if (!a.config.empty()) {
        c = service::ServiceConfig::load(a.config);
    } else if (a.model.empty() || a.mock.empty()) {
        throw service::ConfigError("give --config, or both --model and --mock");
    }
    if (!a.model.empty()) c.model_path = a.model;
    if (!a.mock.empty()) {
        c.provider.kind = service::ProviderSelection::Kind::mock;
        c.provider.script_path = a.mock;
    }
    if (a.level) c.level = *a.level;
    return c;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw service::ConfigError("cannot write " + path.string());
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw service::ConfigError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void print_result(const explain::ExplanationResult& r, bool verbose) {
    std::cout << r.answer << "\n";
    std::cout << "trace: " << r.trace_id << "\n";
    if (!verbose) return;
    std::cout << "class: " << explain::to_string(r.verdict.question_class) << ", k=" << r.verdict.k << "\n";
    for (const auto& s : r.used_snippets) {
        std::cout << "snippet: " << tmk::to_string(s.snippet.part) << " " << s.snippet.source_id << " ("
                  << eval::detail::fixed(s.score, 4) << ")\n";
    }
    if (r.walked_method) std::cout << "walked: " << r.walked_method->str() << "\n";
}

int cmd_validate(const std::string& path) {
    tmk::TmkModel model;
    try {
        model = tmk::load_model(path);
    } catch (const tmk::ModelError& e) {
        std::cerr << e.what() << "\n";
        return e.kind() == tmk::ModelErrorKind::io ? config_error : invalid_model;
    }
    const auto report = tmk::validate(model);
    for (const auto& v : report.violations) std::cout << v.rule << "\t" << v.node_id << "\t" << v.detail << "\n";
    if (!report.ok()) {
        std::cout << report.violations.size() << " violation(s)\n";
        return invalid_model;
    }
    const auto layers = tmk::compute_layers(model);
    std::cout << "ok: " << model.tasks.size() << " tasks, " << model.methods.size() << " methods, "
              << model.knowledge.size() << " knowledge entries, max layer " << tmk::max_layer(layers) << "\n";
    return ok;
}

int cmd_degrade(const std::string& path, int level) {
    const auto model = service::load_valid_model(path);
    const auto ctx = tmk::degrade(*model, tmk::DegradationLevel{level});
    for (const auto& s : ctx.snippets) {
        std::cout << tmk::to_string(s.part) << "\t" << s.source_id << "\t" << s.layer << "\t" << s.text << "\n";
    }
    if (ctx.overview_only) std::cout << "overview\t-\t-\t" << ctx.overview << "\n";
    return ok;
}

int cmd_export_dot(const std::string& path, const std::string& out) {
    const auto model = service::load_valid_model(path);
    const auto dot = tmk::export_dot(*model);
    if (out.empty() || out == "-") {
        std::cout << dot;
    } else {
        write_file(out, dot);
    }
    return ok;
}

int cmd_ask(const PipelineArgs& a, const std::string& question, bool verbose) {
    auto pipeline = service::build_pipeline(resolve_config(a));
    try {
        print_result(pipeline->explain(question), verbose);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return config_error;
    }
    return ok;
}

int cmd_repl(const PipelineArgs& a, bool verbose) {
    auto pipeline = service::build_pipeline(resolve_config(a));
    std::cout << "Ask " << pipeline->model().agent_name << " about itself. Empty line or Ctrl-D quits.\n";
    std::string line;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) break;
        try {
            print_result(pipeline->explain(line), verbose);
        } catch (const explain::ExplainError& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return ok;
}

int cmd_serve(const PipelineArgs& a, std::optional<int> port, std::string host) {
    auto config = resolve_config(a);
    if (port) config.port = *port;
    if (!host.empty()) config.host = host;
    auto pipeline = service::build_pipeline(config);
    std::shared_ptr<service::RecordStore> store;
    try {
        store = std::make_shared<service::RecordStore>(config.store_path);
    } catch (const std::exception& e) {
        throw service::ConfigError(e.what());
    }
    service::Service svc(pipeline, store, {config.trigger_tag, config.static_dir});
    httplib::Server server;
    svc.mount(server);
    static httplib::Server* running = &server;
    std::signal(SIGINT, [](int) { running->stop(); });
    std::signal(SIGTERM, [](int) { running->stop(); });
    std::cerr << "listening on " << config.host << ":" << config.port << " (" << store->size()
              << " stored records, level " << config.level << ")\n";
    if (!server.listen(config.host, config.port)) {
        throw service::ConfigError("cannot listen on " + config.host + ":" + std::to_string(config.port));
    }
    return ok;
}

std::unique_ptr<eval::RunLog> open_log(const std::string& path) {
    if (path.empty()) return nullptr;
    return std::make_unique<eval::RunLog>(path);
}

int cmd_precision(const PipelineArgs& a, const std::string& questions, int n, int workers, const std::string& out,
                  const std::string& log_path) {
    auto pipeline = service::build_pipeline(resolve_config(a));
    const auto qs = eval::parse_question_list(read_file(questions));
    if (qs.empty()) throw service::ConfigError(questions + " holds no questions");
    auto log = open_log(log_path);
    const auto report = eval::run_precision_study(qs, n, *pipeline, {workers, log.get()});
    const auto summary = eval::format_precision_summary(report);
    std::cout << summary;
    write_file(fs::path(out) / "precision.jsonl", eval::precision_jsonl(report));
    write_file(fs::path(out) / "precision.txt", summary);
    return ok;
}

int cmd_ablation(const PipelineArgs& a, const std::string& questions, double alpha, const std::string& out,
                 const std::string& log_path) {
    const auto config = resolve_config(a);
    auto model = service::load_valid_model(config.model_path);
    auto provider = service::make_provider(config.provider);
    auto templates = service::load_templates(config.templates_dir);
    explain::PipelineOptions options{config.default_k, config.k_max, config.provider.temperature,
                                     config.provider.model_name};
    auto factory = [&](tmk::DegradationLevel level) {
        return std::make_shared<const explain::ExplainPipeline>(
            explain::ExplainPipeline::at_level(model, level, provider, templates, options));
    };
    std::vector<std::string> qs;
    const auto text = read_file(questions);
    if (questions.ends_with(".tsv")) {
        const auto bank = eval::QuestionBank::parse(text);
        for (const auto& e : bank.entries()) qs.push_back(e.question);
    } else {
        qs = eval::parse_question_list(text);
    }
    auto log = open_log(log_path);
    const auto report = eval::run_ablation_study(qs, factory, {alpha, log.get()});
    std::cout << eval::format_ablation_summary(report);
    write_file(fs::path(out) / "ablation.json", eval::ablation_json(report).dump(2) + "\n");
    write_file(fs::path(out) / "ablation.txt", eval::format_ablation_summary(report));
    return report.aborted ? provider_error : ok;
}

int cmd_correctness(const PipelineArgs& a, const std::string& bank_path, const std::string& judgments,
                    const std::string& out, const std::string& log_path) {
    const auto bank = eval::QuestionBank::parse(read_file(bank_path));
    if (!judgments.empty()) {
        const auto summary = eval::summarize_correctness(bank, eval::parse_judgments(read_file(judgments)));
        const auto table = eval::format_correctness_table(summary);
        std::cout << table;
        write_file(fs::path(out) / "correctness.txt", table);
        return ok;
    }
    auto pipeline = service::build_pipeline(resolve_config(a));
    auto log = open_log(log_path);
    const auto transcript = eval::run_correctness_study(bank, *pipeline, log.get());
    write_file(fs::path(out) / "transcript.jsonl", eval::transcript_jsonl(transcript));
    write_file(fs::path(out) / "judgments.tsv", eval::judgment_sheet(bank, transcript));
    const auto table = eval::format_correctness_table(eval::summarize_correctness(bank, {}));
    std::cout << table;
    int failed = 0;
    for (const auto& t : transcript) failed += t.error ? 1 : 0;
    std::cout << transcript.size() << " questions asked, " << failed << " failed. Fill in "
              << (fs::path(out) / "judgments.tsv").string() << " and rerun with --judgments.\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-explanation engine over task-method-knowledge models", "selfex"};
    app.require_subcommand(1);

    std::string model_path;
    auto* validate = app.add_subcommand("validate", "Check a model file and print every violation");
    validate->add_option("model", model_path, "Model file")->required();

    int level = 0;
    auto* degrade = app.add_subcommand("degrade", "List the snippets visible at a degradation level");
    degrade->add_option("model", model_path, "Model file")->required();
    degrade->add_option("-l,--level", level, "Degradation level 0..6")->required()->check(CLI::Range(0, 6));

    std::string out_path;
    auto* dot = app.add_subcommand("export-dot", "Write the model as a Graphviz graph");
    dot->add_option("model", model_path, "Model file")->required();
    dot->add_option("-o,--out", out_path, "Output file (default stdout)");

    PipelineArgs pargs;
    bool verbose = false;
    std::string question;
    auto* ask = app.add_subcommand("ask", "Answer one question");
    add_pipeline_options(ask, pargs);
    ask->add_option("question", question, "Question text")->required();
    ask->add_flag("-v,--verbose", verbose, "Also print class, k and snippets");

    auto* repl = app.add_subcommand("repl", "Answer questions read from stdin");
    add_pipeline_options(repl, pargs);
    repl->add_flag("-v,--verbose", verbose, "Also print class, k and snippets");

    std::optional<int> port;
    std::string host;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    add_pipeline_options(serve, pargs);
    serve->add_option("-p,--port", port, "Port; overrides the config");
    serve->add_option("--host", host, "Bind address; overrides the config");

    auto* study = app.add_subcommand("study", "Run an evaluation study");
    study->require_subcommand(1);
    std::string questions, log_path, judgments;
    std::string study_out = ".";
    int n = 100, workers = 1;
    double alpha = 0.05;

    auto* precision = study->add_subcommand("precision", "Ask each question n times and count distinct answers");
    add_pipeline_options(precision, pargs);
    precision->add_option("-q,--questions", questions, "Question list, one per line")->required();
    precision->add_option("-n,--n", n, "Runs per question")->check(CLI::Range(2, 100000));
    precision->add_option("-w,--workers", workers, "Concurrent runs")->check(CLI::Range(1, 64));

    auto* ablation = study->add_subcommand("ablation", "Compare answers across degradation levels");
    add_pipeline_options(ablation, pargs);
    ablation->add_option("-q,--questions", questions, "Question list or question bank (.tsv)")->required();
    ablation->add_option("--alpha", alpha, "Significance threshold")->check(CLI::Range(0.0, 1.0));

    auto* correctness = study->add_subcommand("correctness", "Ask every bank question, or tally judgments");
    add_pipeline_options(correctness, pargs);
    correctness->add_option("-b,--bank", questions, "Question bank (.tsv)")->required();
    correctness->add_option("-j,--judgments", judgments, "Filled-in judgments; prints the summary table");

    for (auto* s : {precision, ablation, correctness}) {
        s->add_option("-o,--out", study_out, "Report directory");
        s->add_option("--log", log_path, "Resume log; finished runs are skipped");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; real usage errors share the config code
        return app.exit(e) == 0 ? 0 : config_error;
    }

    try {
        if (*validate) return cmd_validate(model_path);
        if (*degrade) return cmd_degrade(model_path, level);
        if (*dot) return cmd_export_dot(model_path, out_path);
        if (*ask) return cmd_ask(pargs, question, verbose);
        if (*repl) return cmd_repl(pargs, verbose);
        if (*serve) return cmd_serve(pargs, port, host);
        if (*precision) return cmd_precision(pargs, questions, n, workers, study_out, log_path);
        if (*ablation) return cmd_ablation(pargs, questions, alpha, study_out, log_path);
        if (*correctness) return cmd_correctness(pargs, questions, judgments, study_out, log_path);
    } catch (const service::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const explain::ExplainError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return provider_error;
    } catch (const llm::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return provider_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    }
    return ok;
}
