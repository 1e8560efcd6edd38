// thematic: command-line front end.
//
//   thematic serve    --config FILE [--host H] [--port N]
//   thematic run      --config FILE --image FILE --axis LABEL --position P --out DIR [--k K] [--seed S]
//   thematic fixtures record --config FILE --requests FILE --out FILE [--seed S]
//   thematic fixtures replay --fixtures FILE --requests FILE
//
// Exit codes: 0 ok, 1 invalid input, 2 configuration, 3 provider,
// 4 storage, 5 not found or conflict.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thematic/service/http.hpp"

namespace {

using namespace thematic;
namespace fs = std::filesystem;

Bytes read_input(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorCode::invalid_argument, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const fs::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::storage_unavailable, "cannot write " + p.string());
    out << data;
    if (!out) fail(ErrorCode::storage_unavailable, "short write to " + p.string());
}

int report(const Error& e) {
    std::cerr << "thematic: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
}

// ---------------------------------------------------------------------------
// serve

service::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config_path, const std::string& host, int port) {
    auto cfg = service::load_config(config_path);
    auto logger = std::make_shared<service::Logger>(&std::cerr);
    auto app = service::Application::from_config(cfg, logger);
    service::HttpServer server(*app);
    int bound = server.bind(host, port);
    logger->info("listening", json{{"host", host}, {"port", bound}, {"config", service::redacted_view(cfg)}});
    std::cout << "listening on http://" << host << ':' << bound << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string config;
    std::string image;
    std::string axis;
    double position = 0.0;
    std::string out;
    std::optional<int> k;
    std::optional<std::int64_t> seed;
};

int cmd_run(const RunArgs& a) {
    auto cfg = service::load_config(a.config);
    orchestrator::check_position(a.position);
    if (a.k && *a.k < 1) fail(ErrorCode::invalid_argument, "--k must be >= 1");
    if (trim(a.axis).empty()) fail(ErrorCode::invalid_argument, "--axis must name a theme");
    Bytes image = read_input(a.image);

    fs::path out = a.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorCode::storage_unavailable, "cannot create " + out.string());

    auto rt = service::build_runtime(cfg);
    auto blobs = std::make_shared<orchestrator::FileBlobStore>(out);
    orchestrator::Orchestrator orch(rt.providers, rt.embeddings, blobs, rt.clock, service::orchestrator_options(cfg),
                                    theme::PipelineOptions{cfg.limits.axis_concurrency});

    auto created = orch.create_session(rt.ids->next_session_id(), image, {a.axis});
    const ThemeAxis* axis = nullptr;
    for (const auto& x : created.session.axes)
        if (dedup_key(x.theme.label) == dedup_key(a.axis)) axis = &x;
    if (!axis) fail(ErrorCode::unknown_axis, "no axis for theme '" + a.axis + "'");

    auto generated = orch.generate(created.session, {axis->id, a.position}, a.k.value_or(cfg.limits.default_k), a.seed);
    const Session& s = generated.session;
    const auto& child = generated.record.image;

    write_output(out / "session.json", json(s).dump(2) + "\n");
    write_output(out / "prompt.txt", orchestrator::render_prompt(generated.record.prompt) + "\n");
    write_output(out / "generated.png", blobs->get(child.payload_hash));

    std::cout << json{{"session_id", s.id},
                      {"axis_id", axis->id},
                      {"image_id", child.id},
                      {"payload_hash", child.payload_hash},
                      {"descriptors", child.prompt_used->injected_descriptors.size()},
                      {"out", out.string()}}
                     .dump()
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// fixtures

struct RequestLine {
    std::string operation;
    json request;
};

std::vector<RequestLine> read_requests(const fs::path& p) {
    json j = json::parse(read_input(p), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        fail(ErrorCode::invalid_argument, p.string() + " must be a JSON array of {operation, request}");
    std::vector<RequestLine> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("operation") || !item.at("operation").is_string() ||
            !item.contains("request"))
            fail(ErrorCode::invalid_argument, "each request needs {operation, request}");
        out.push_back({item.at("operation").get<std::string>(), item.at("request")});
    }
    return out;
}

providers::ProviderKind kind_of(const std::string& operation) {
    using providers::ProviderKind;
    if (operation.rfind("language_model.", 0) == 0) return ProviderKind::language_model;
    if (operation.rfind("embedder.", 0) == 0) return ProviderKind::embedder;
    if (operation.rfind("generator.", 0) == 0) return ProviderKind::generator;
    fail(ErrorCode::invalid_argument, "unknown operation '" + operation + "'");
}

int cmd_record(const std::string& config_path, const std::string& requests_path, const std::string& out_path,
               std::int64_t seed) {
    auto cfg = service::load_config(config_path);
    auto requests = read_requests(requests_path);

    providers::FixtureFile merged{providers::FixtureHeader{"sha256", seed, "1", 64, "mock-embed/v1"}};
    if (fs::exists(out_path)) merged = providers::FixtureFile::load(out_path);

    const providers::ProviderConfig* configs[] = {&cfg.language_model, &cfg.embedder, &cfg.generator};
    std::map<providers::ProviderKind, std::shared_ptr<providers::RecordingClient>> recorders;
    for (const auto& r : requests) {
        auto kind = kind_of(r.operation);
        auto& rec = recorders[kind];
        if (!rec) {
            auto client = providers::make_client(*configs[static_cast<int>(kind)], cfg.base_dir);
            rec = std::make_shared<providers::RecordingClient>(client, merged.header());
        }
        rec->call(r.operation, r.request);
    }
    std::size_t added = 0;
    for (const auto& [kind, rec] : recorders) {
        auto snapshot = rec->snapshot();
        for (const auto& [fp, e] : snapshot.entries()) {
            merged.put(e.operation, e.request, e.response);
            ++added;
        }
    }
    merged.save(out_path);
    std::cout << json{{"recorded", added}, {"entries", merged.entries().size()}, {"out", out_path}}.dump() << '\n';
    return 0;
}

int cmd_replay(const std::string& fixtures_path, const std::string& requests_path) {
    auto fixtures = providers::FixtureFile::load(fixtures_path);
    auto requests = read_requests(requests_path);
    int misses = 0;
    for (const auto& r : requests) {
        auto fp = providers::fingerprint(r.operation, r.request);
        if (const auto* e = fixtures.find(r.operation, r.request)) {
            std::cout << json{{"operation", r.operation}, {"fingerprint", fp}, {"response", e->response}}.dump()
                      << '\n';
        } else {
            ++misses;
            std::cerr << "thematic: fixture_miss: " << r.operation << ' ' << fp << '\n';
        }
    }
    return misses ? exit_code(ErrorCode::fixture_miss) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thematic image navigation"};
    app.require_subcommand(1);

    std::string config, host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--config", config, "Config file")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free port)");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Create a session from an image and generate one variation");
    run->add_option("--config", run_args.config, "Config file")->required();
    run->add_option("--image", run_args.image, "PNG or JPEG input")->required();
    run->add_option("--axis", run_args.axis, "Theme label of the axis to move along")->required();
    run->add_option("--position", run_args.position, "Position in [-1, 1]")->required();
    run->add_option("--out", run_args.out, "Output directory")->required();
    run->add_option("--k", run_args.k, "Number of descriptors to inject");
    run->add_option("--seed", run_args.seed, "Generator seed");

    auto* fixtures = app.add_subcommand("fixtures", "Record or replay provider fixtures");
    fixtures->require_subcommand(1);
    std::string requests, out, fixture_file;
    std::int64_t record_seed = 0;
    auto* record = fixtures->add_subcommand("record", "Call the configured providers and save responses");
    record->add_option("--config", config, "Config file")->required();
    record->add_option("--requests", requests, "JSON array of {operation, request}")->required();
    record->add_option("--out", out, "Fixture file to create or extend")->required();
    record->add_option("--seed", record_seed, "Seed stored in a new fixture header");
    auto* replay = fixtures->add_subcommand("replay", "Answer requests from a fixture file");
    replay->add_option("--fixtures", fixture_file, "Fixture file")->required();
    replay->add_option("--requests", requests, "JSON array of {operation, request}")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*serve) return cmd_serve(config, host, port);
        if (*run) return cmd_run(run_args);
        if (*record) return cmd_record(config, requests, out, record_seed);
        if (*replay) return cmd_replay(fixture_file, requests);
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "thematic: " << e.what() << '\n';
        return 4;
    }
    return 1;
}
