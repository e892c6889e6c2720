// meterhub CLI: serve the ingest pipeline, run radio analyses, drive the
// fleet simulator, export stored readings. Exit codes: 0 success, 2
// usage/config, 3 runtime.
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "meterhub/campaign.hpp"
#include "meterhub/connect/config.hpp"
#include "meterhub/http_api.hpp"
#include "meterhub/radio/analysis.hpp"
#include "meterhub/reading_json.hpp"
#include "meterhub/service.hpp"
#include "meterhub/sim/sim.hpp"
#include "meterhub/store/store.hpp"
#include "meterhub/time.hpp"
#include "meterhub/types.hpp"

namespace {

using namespace meterhub;

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

int diag(const std::string& message, int code) {
    std::cerr << "meterhub: " << message << "\n";
    return code;
}

int emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    f << content;
    f.flush();
    if (!f) return diag("cannot write " + out_path, kExitRuntime);
    return 0;
}

/// METERHUB_BROKER beats the --broker flag; empty means no bridge.
std::optional<std::string> broker_endpoint(const std::string& flag_value) {
    if (const char* env = std::getenv("METERHUB_BROKER"); env && *env)
        return std::string(env);
    if (!flag_value.empty()) return flag_value;
    return std::nullopt;
}

/// Unix seconds or ISO-8601 with a Z suffix.
std::optional<UnixSeconds> parse_when_arg(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s.find_first_not_of("-0123456789") == std::string::npos) {
        try {
            return static_cast<UnixSeconds>(std::stoll(s));
        } catch (...) {
            return std::nullopt;
        }
    }
    return parse_iso8601(s);
}

/// Shortest decimal form: integral values without a point, 0.25 intact.
std::string fmt_num(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15)
        return std::to_string(static_cast<long long>(v));
    return nlohmann::json(v).dump();
}

std::string fmt_range(const RateRange& r) {
    if (r.min_kbps == r.max_kbps) return fmt_num(r.min_kbps);
    return fmt_num(r.min_kbps) + "-" + fmt_num(r.max_kbps);
}

constexpr Technology kTable1Order[] = {Technology::lorawan, Technology::sigfox,
                                       Technology::nbiot, Technology::wisun};

int cmd_analyze_linkbudget(const std::string& out) {
    std::string csv = "technology,direction,budget_db\n";
    for (Technology t : kTable1Order) {
        const RadioProfile& p = radio_profile(t);
        auto ul = radio::link_budget(p, Direction::ul);
        auto dl = radio::link_budget(p, Direction::dl);
        if (!ul.ok()) return diag(ul.error(), kExitRuntime);
        if (!dl.ok()) return diag(dl.error(), kExitRuntime);
        const std::string name(to_string(t));
        csv += name + ",UL," + radio::format_db(ul.value().budget_db) + "\n";
        csv += name + ",DL," + radio::format_db(dl.value().budget_db) + "\n";
        if (dl.value().boosted_budget_db)
            csv += name + ",DL_boosted," +
                   radio::format_db(*dl.value().boosted_budget_db) + "\n";
    }
    return emit(out, csv);
}

int cmd_analyze_bpl(const std::string& campaign_path, const std::string& out) {
    if (campaign_path.empty())
        return diag("analyze bpl requires --campaign", kExitUsage);
    auto campaign = load_campaign(campaign_path);
    if (!campaign.ok()) return diag(campaign.error(), kExitUsage);
    auto table = radio::bpl_table(campaign.value());
    if (!table.ok()) return diag(table.error(), kExitUsage);
    return emit(out, radio::bpl_table_csv(table.value()));
}

int cmd_analyze_budgets(const std::string& out) {
    std::string csv =
        "technology,data_rate_ul_kbps,data_rate_dl_kbps,max_payload_ul_bytes,"
        "max_payload_dl_bytes,max_ul_msgs_per_day,max_dl_msgs_per_day,"
        "max_airtime_s_per_day\n";
    auto count_or = [](const std::optional<int>& v) {
        return v ? std::to_string(*v) : std::string("unlimited");
    };
    for (Technology t : kTable1Order) {
        const TechnologyLimits& l = technology_limits(t);
        csv += std::string(to_string(t)) + ',' + fmt_range(l.data_rate_ul_kbps) +
               ',' + fmt_range(l.data_rate_dl_kbps) + ',' +
               std::to_string(l.max_payload_ul_bytes) + ',' +
               std::to_string(l.max_payload_dl_bytes) + ',' +
               count_or(l.max_ul_msgs_per_day) + ',' +
               count_or(l.max_dl_msgs_per_day) + ',' +
               (l.max_airtime_s_per_day ? fmt_num(*l.max_airtime_s_per_day)
                                        : std::string("unlimited")) +
               "\n";
    }
    return emit(out, csv);
}

int cmd_analyze_cost(int devices, int years, const std::string& out) {
    if (devices < 0 || years < 0)
        return diag("--devices and --years must be non-negative", kExitUsage);
    std::string csv = "technology,devices,years,cost_eur\n";
    for (Technology t : kTable1Order) {
        const double cost = radio::fleet_cost_eur({{t, devices}}, years);
        csv += std::string(to_string(t)) + ',' + std::to_string(devices) +
               ',' + std::to_string(years) + ',' + fmt_num(cost) + "\n";
    }
    return emit(out, csv);
}

int cmd_serve(const std::string& config_path,
              const std::optional<std::string>& store_override,
              const std::optional<int>& port_override, bool strict_crc,
              const std::string& broker_flag) {
    auto loaded = connect::load_config(config_path);
    if (!loaded.ok()) return diag(loaded.error(), kExitUsage);
    connect::ConnectorConfig cfg = loaded.take();
    if (cfg.devices.empty())
        return diag("config defines no devices", kExitUsage);
    if (store_override) cfg.store_root = *store_override;
    if (port_override) cfg.http_port = *port_override;
    if (strict_crc) cfg.strict_crc = true;

    ServiceOptions opts;
    opts.config = std::move(cfg);
    opts.broker_override = broker_endpoint(broker_flag);
    auto service = Service::create(std::move(opts));
    if (!service.ok()) return diag(service.error(), kExitRuntime);

    HttpApi api(*service.value());
    auto started = api.start("0.0.0.0", service.value()->config().http_port);
    if (!started.ok()) return diag(started.error(), kExitRuntime);

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << "meterhub ready\n";
    while (!g_stop.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    api.stop();
    return 0;
}

int cmd_simulate(const std::string& scenario_path,
                 const std::string& config_path,
                 const std::string& campaign_override,
                 const std::optional<std::string>& store_override,
                 const std::string& broker_flag, const std::string& out) {
    auto loaded = connect::load_config(config_path);
    if (!loaded.ok()) return diag(loaded.error(), kExitUsage);
    auto scenario = sim::load_scenario(scenario_path);
    if (!scenario.ok()) return diag(scenario.error(), kExitUsage);

    const std::string campaign_path = campaign_override.empty()
                                          ? scenario.value().campaign_path
                                          : campaign_override;
    auto campaign = load_campaign(campaign_path);
    if (!campaign.ok()) return diag(campaign.error(), kExitUsage);

    connect::ConnectorConfig cfg = loaded.take();
    if (store_override) cfg.store_root = *store_override;
    ServiceOptions opts;
    opts.config = std::move(cfg);
    opts.broker_override = broker_endpoint(broker_flag);
    auto service = Service::create(std::move(opts));
    if (!service.ok()) return diag(service.error(), kExitRuntime);

    auto report = sim::run(scenario.value(), campaign.value(),
                           [&](Technology t, const std::string& id,
                               const nlohmann::json& doc) {
                               service.value()->deliver(t, id, doc);
                           });
    if (!report.ok()) return diag(report.error(), kExitUsage);
    return emit(out, report.value().to_json().dump(2) + "\n");
}

int cmd_export(const std::string& store_flag, const std::string& config_path,
               const std::string& device, const std::string& from_s,
               const std::string& to_s,
               const std::optional<std::int64_t>& bucket,
               const std::string& format, const std::string& out) {
    std::string root = store_flag;
    if (root.empty() && !config_path.empty()) {
        auto loaded = connect::load_config(config_path);
        if (!loaded.ok()) return diag(loaded.error(), kExitUsage);
        root = loaded.value().store_root;
    }
    if (root.empty()) return diag("export needs --store or --config", kExitUsage);
    if (format != "csv" && format != "ndjson")
        return diag("unknown format \"" + format + "\"", kExitUsage);

    auto store = store::Store::open(root);
    if (!store.ok()) return diag(store.error(), kExitRuntime);

    store::Query q;
    q.to = std::numeric_limits<UnixSeconds>::max();
    if (!from_s.empty()) {
        auto t = parse_when_arg(from_s);
        if (!t) return diag("bad time bounds: cannot parse --from", kExitUsage);
        q.from = *t;
    }
    if (!to_s.empty()) {
        auto t = parse_when_arg(to_s);
        if (!t) return diag("bad time bounds: cannot parse --to", kExitUsage);
        q.to = *t;
    }
    if (q.from >= q.to)
        return diag("bad time bounds: from must precede to", kExitUsage);
    q.downsample_s = bucket;

    std::vector<std::string> devices;
    if (!device.empty())
        devices.push_back(device);
    else
        devices = store.value()->device_ids();

    std::string body;
    if (format == "csv")
        body = "timestamp,device_id,technology,medium,quantity,value,unit,rssi_dbm\n";
    for (const std::string& id : devices) {
        q.device_id = id;
        if (format == "csv") {
            auto part = store.value()->export_csv(q);
            if (!part.ok()) return diag(part.error(), kExitUsage);
            body += part.value().substr(part.value().find('\n') + 1);
        } else {
            auto hits = store.value()->query(q);
            if (!hits.ok()) return diag(hits.error(), kExitUsage);
            for (const auto& sr : hits.value())
                body += reading_to_string(sr.reading) + "\n";
        }
    }
    return emit(out, body);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid LPWAN energy-monitoring middleware"};
    app.require_subcommand(1);

    auto* serve = app.add_subcommand("serve", "run the ingest service");
    std::string serve_config, serve_broker;
    std::optional<std::string> serve_store;
    std::optional<int> serve_port;
    bool serve_strict = false;
    serve->add_option("--config", serve_config, "connector config JSON")
        ->required();
    serve->add_option("--store", serve_store, "store root (overrides config)");
    serve->add_option("--http-port", serve_port, "HTTP port (overrides config)");
    serve->add_flag("--strict-crc", serve_strict, "reject SML frames with a bad CRC");
    serve->add_option("--broker", serve_broker, "external MQTT broker host[:port]");

    auto* analyze = app.add_subcommand("analyze", "radio analysis tables");
    std::string an_kind, an_campaign, an_out;
    int an_devices = 100, an_years = 10;
    analyze->add_option("kind", an_kind, "linkbudget | bpl | budgets | cost")
        ->required()
        ->check(CLI::IsMember({"linkbudget", "bpl", "budgets", "cost"}));
    analyze->add_option("--campaign", an_campaign, "campaign JSON (bpl)");
    analyze->add_option("--devices", an_devices, "fleet size (cost)");
    analyze->add_option("--years", an_years, "horizon in years (cost)");
    analyze->add_option("--out", an_out, "write to a file instead of stdout");

    auto* simulate =
        app.add_subcommand("simulate", "run a fleet scenario through the pipeline");
    std::string sim_scenario, sim_config, sim_campaign, sim_broker, sim_out;
    std::optional<std::string> sim_store;
    simulate->add_option("--scenario", sim_scenario, "scenario JSON")->required();
    simulate->add_option("--config", sim_config, "connector config JSON")->required();
    simulate->add_option("--campaign", sim_campaign, "override the scenario's campaign");
    simulate->add_option("--store", sim_store, "store root (overrides config)");
    simulate->add_option("--broker", sim_broker, "external MQTT broker host[:port]");
    simulate->add_option("--out", sim_out, "report file (default stdout)");

    auto* export_cmd = app.add_subcommand("export", "dump stored readings");
    std::string ex_store, ex_config, ex_device, ex_from, ex_to, ex_out;
    std::string ex_format = "csv";
    std::optional<std::int64_t> ex_bucket;
    export_cmd->add_option("--store", ex_store, "store root");
    export_cmd->add_option("--config", ex_config, "read the store root from a config");
    export_cmd->add_option("--device", ex_device, "restrict to one device");
    export_cmd->add_option("--from", ex_from, "ISO-8601 or unix seconds, inclusive");
    export_cmd->add_option("--to", ex_to, "ISO-8601 or unix seconds, exclusive");
    export_cmd->add_option("--bucket", ex_bucket, "downsample bucket in seconds");
    export_cmd->add_option("--format", ex_format, "csv | ndjson");
    export_cmd->add_option("--out", ex_out, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (serve->parsed())
        return cmd_serve(serve_config, serve_store, serve_port, serve_strict,
                         serve_broker);
    if (analyze->parsed()) {
        if (an_kind == "linkbudget") return cmd_analyze_linkbudget(an_out);
        if (an_kind == "bpl") return cmd_analyze_bpl(an_campaign, an_out);
        if (an_kind == "budgets") return cmd_analyze_budgets(an_out);
        return cmd_analyze_cost(an_devices, an_years, an_out);
    }
    if (simulate->parsed())
        return cmd_simulate(sim_scenario, sim_config, sim_campaign, sim_store,
                            sim_broker, sim_out);
    if (export_cmd->parsed())
        return cmd_export(ex_store, ex_config, ex_device, ex_from, ex_to,
                          ex_bucket, ex_format, ex_out);
    return kExitUsage;
}
