#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <meterhub/bus/bus.hpp>
#include <meterhub/bytes.hpp>
#include <meterhub/codec/compact.hpp>
#include <meterhub/codec/mbus.hpp>
#include <meterhub/codec/pulse.hpp>
#include <meterhub/codec/sml.hpp>
#include <meterhub/connect/config.hpp>
#include <meterhub/connect/dispatch.hpp>
#include <meterhub/connect/ingest.hpp>
#include <meterhub/http_api.hpp>
#include <meterhub/service.hpp>

using namespace meterhub;
using namespace meterhub::connect;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("meterhub-conn-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

json base_config() {
    return json::parse(R"({
        "strict_crc": false,
        "devices": [
            {"device_id": "heat-1", "technology": "lorawan", "codec": "mbus",
             "medium": "heat"},
            {"device_id": "gas-2", "technology": "sigfox", "codec": "pulse",
             "pulse_weight": 0.01, "pulse_weight_unit": "m3",
             "medium": "gas"},
            {"device_id": "elec-3", "technology": "nbiot", "codec": "sml"},
            {"device_id": "water-4", "technology": "wisun",
             "codec": "compact"}
        ]
    })");
}

ConnectorConfig make_config() {
    auto cfg = config_from_json(base_config());
    REQUIRE(cfg.ok());
    return cfg.take();
}

// Collects everything published under a filter for assertions.
struct Capture {
    std::vector<std::string> topics;
    std::vector<json> docs;

    void attach(bus::Bus& bus, const std::string& filter) {
        auto sub = bus.subscribe(filter, [this](const bus::BusMessage& m) {
            topics.push_back(m.topic);
            docs.push_back(
                json::parse(std::string(m.body.begin(), m.body.end())));
        });
        REQUIRE(sub.ok());
    }
};

json ttn_envelope(const std::string& device, const std::string& b64,
                  const json& rx_metadata) {
    json env;
    env["end_device_ids"]["device_id"] = device;
    env["uplink_message"]["frm_payload"] = b64;
    if (!rx_metadata.is_null()) env["uplink_message"]["rx_metadata"] = rx_metadata;
    env["received_at"] = "2024-01-01T00:00:00Z";
    return env;
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates entries") {
    const ConnectorConfig cfg = make_config();
    CHECK(cfg.devices.size() == 4);
    CHECK(!cfg.strict_crc);
    CHECK(cfg.http_port == 8080);
    CHECK(cfg.store_root == "meterhub-data");
    CHECK(!cfg.broker.has_value());

    const DeviceConfig& gas = cfg.devices.at("gas-2");
    CHECK(gas.technology == Technology::sigfox);
    CHECK(gas.codec == CodecKind::pulse);
    CHECK(gas.pulse_weight == 0.01);
    CHECK(gas.pulse_weight_unit == Unit::m3);
    REQUIRE(gas.expected_medium.has_value());
    CHECK(*gas.expected_medium == Medium::gas);

    const DeviceConfig& elec = cfg.devices.at("elec-3");
    CHECK(elec.pulse_weight == 1.0);            // defaults
    CHECK(elec.pulse_weight_unit == Unit::count);
    CHECK(!elec.expected_medium.has_value());

    json j = base_config();
    j["strict_crc"] = true;
    j["http_port"] = 9090;
    j["store"] = "/tmp/x";
    j["broker"] = "mqtt.local:1883";
    auto full = config_from_json(j);
    REQUIRE(full.ok());
    CHECK(full.value().strict_crc);
    CHECK(full.value().http_port == 9090);
    CHECK(full.value().store_root == "/tmp/x");
    CHECK(full.value().broker == "mqtt.local:1883");
}

TEST_CASE("config parsing rejects malformed documents") {
    CHECK(config_from_json(json::array()).error() ==
          "config must be a JSON object");
    CHECK(config_from_json(json::object()).error() ==
          "config needs a devices array");

    auto with_device = [](json dev) {
        json j;
        j["devices"] = json::array({std::move(dev)});
        return config_from_json(j);
    };
    CHECK(with_device({{"technology", "lorawan"}}).error() ==
          "device entry without device_id");
    CHECK(with_device({{"device_id", ""}}).error() == "empty device_id");
    CHECK(with_device({{"device_id", "d"}, {"technology", "zigbee"},
                       {"codec", "mbus"}})
              .error() == "device d: unknown technology");
    CHECK(with_device({{"device_id", "d"}, {"technology", "lorawan"},
                       {"codec", "xml"}})
              .error() == "device d: unknown codec");
    CHECK(with_device({{"device_id", "d"}, {"technology", "lorawan"},
                       {"codec", "pulse"}, {"pulse_weight", 0}})
              .error() == "device d: pulse_weight must be > 0");
    CHECK(with_device({{"device_id", "d"}, {"technology", "lorawan"},
                       {"codec", "pulse"}, {"pulse_weight", -2.5}})
              .error() == "device d: pulse_weight must be > 0");
    CHECK(with_device({{"device_id", "d"}, {"technology", "lorawan"},
                       {"codec", "pulse"}, {"pulse_weight_unit", "liters"}})
              .error() == "device d: unknown pulse_weight_unit");
    CHECK(with_device({{"device_id", "d"}, {"technology", "lorawan"},
                       {"codec", "mbus"}, {"medium", "steam"}})
              .error() == "device d: unknown medium");

    json dup = base_config();
    dup["devices"].push_back(
        {{"device_id", "heat-1"}, {"technology", "lorawan"},
         {"codec", "mbus"}});
    CHECK(config_from_json(dup).error() == "duplicate device_id heat-1");

    CHECK(!load_config("/nonexistent/meterhub.json").ok());
}

TEST_CASE("ingest_lorawan picks the strongest gateway") {
    const json meta = json::array({
        {{"gateway_ids", {{"gateway_id", "gw-a"}}}, {"rssi", -121}, {"snr", -2.5}},
        {{"gateway_ids", {{"gateway_id", "gw-b"}}}, {"rssi", -114}, {"snr", 7.5}},
        {{"gateway_ids", {{"gateway_id", "gw-c"}}}, {"rssi", -130}},
    });
    auto up = ingest_lorawan(
        ttn_envelope("heat-1", to_base64({0x0C, 0x06, 0x45, 0x23, 0x01, 0x00}),
                     meta));
    REQUIRE(up.ok());
    CHECK(up.value().technology == Technology::lorawan);
    CHECK(up.value().device_id == "heat-1");
    CHECK(up.value().payload == Bytes{0x0C, 0x06, 0x45, 0x23, 0x01, 0x00});
    CHECK(up.value().received_at == 1704067200);
    CHECK(up.value().link.rssi_dbm == -114.0);
    CHECK(up.value().link.snr_db == 7.5);
    CHECK(up.value().link.gateway_count == 3);

    // unix received_at, no metadata
    json env = ttn_envelope("heat-1", "AA==", json());
    env["received_at"] = 1704067200;
    auto bare = ingest_lorawan(env);
    REQUIRE(bare.ok());
    CHECK(bare.value().received_at == 1704067200);
    CHECK(!bare.value().link.rssi_dbm.has_value());
    CHECK(!bare.value().link.gateway_count.has_value());
}

TEST_CASE("ingest_lorawan rejects malformed envelopes") {
    CHECK(ingest_lorawan(json::array()).error() ==
          "envelope must be a JSON object");
    CHECK(ingest_lorawan(json::object()).error() == "missing device_id");

    json env = ttn_envelope("d", "AA==", json());
    env["uplink_message"].erase("frm_payload");
    CHECK(ingest_lorawan(env).error() == "missing payload field");

    env = ttn_envelope("d", "not base64!!!", json());
    CHECK(ingest_lorawan(env).error() == "undecodable base-64");

    env = ttn_envelope("d", "AA==", json());
    env.erase("received_at");
    CHECK(ingest_lorawan(env).error() == "missing received_at");
    env["received_at"] = "yesterday";
    CHECK(ingest_lorawan(env).error() == "malformed received_at");
    env["received_at"] = 12.5;
    CHECK(ingest_lorawan(env).error() == "malformed received_at");
}

TEST_CASE("ingest_sigfox parses the backend callback") {
    json doc{{"device", "gas-2"},
             {"time", 1704067200},
             {"data", "010000012c"},
             {"rssi", -126.0},
             {"seqNumber", 17}};
    auto up = ingest_sigfox(doc);
    REQUIRE(up.ok());
    CHECK(up.value().technology == Technology::sigfox);
    CHECK(up.value().device_id == "gas-2");
    CHECK(up.value().payload.size() == 5);
    CHECK(up.value().received_at == 1704067200);
    CHECK(up.value().link.rssi_dbm == -126.0);

    doc.erase("rssi");
    CHECK(!ingest_sigfox(doc).value().link.rssi_dbm.has_value());

    CHECK(ingest_sigfox(json::array()).error() ==
          "document must be a JSON object");
    CHECK(ingest_sigfox(json::object()).error() == "missing device");
    json bad{{"device", "d"}};
    CHECK(ingest_sigfox(bad).error() == "missing time");
    bad["time"] = 1;
    CHECK(ingest_sigfox(bad).error() == "missing data");
    bad["data"] = "zz";
    CHECK(ingest_sigfox(bad).error() == "malformed hex");

    // 12 bytes pass, 13 hit the Sigfox cap
    bad["data"] = std::string(24, 'a');
    CHECK(ingest_sigfox(bad).ok());
    bad["data"] = std::string(26, 'a');
    CHECK(ingest_sigfox(bad).error() == "payload cap");
}

TEST_CASE("ingest_nbiot covers NB-IoT and Wi-SUN documents") {
    json doc{{"imei", "elec-3"},
             {"payload", "0c0645230100"},
             {"sent_at", "2024-01-01T00:00:00Z"},
             {"rssi_dbm", -97.5}};
    auto up = ingest_nbiot(doc);
    REQUIRE(up.ok());
    CHECK(up.value().technology == Technology::nbiot);
    CHECK(up.value().device_id == "elec-3");
    CHECK(up.value().received_at == 1704067200);
    CHECK(up.value().link.rssi_dbm == -97.5);

    auto wisun = ingest_nbiot(doc, Technology::wisun);
    REQUIRE(wisun.ok());
    CHECK(wisun.value().technology == Technology::wisun);

    CHECK(ingest_nbiot(json::object()).error() == "missing imei");
    json bad{{"imei", "x"}};
    CHECK(ingest_nbiot(bad).error() == "missing payload field");
    bad["payload"] = "0g";
    CHECK(ingest_nbiot(bad).error() == "malformed hex");
    bad["payload"] = "0c";
    CHECK(ingest_nbiot(bad).error() == "missing sent_at");
}

TEST_CASE("dispatch publishes decoded readings to their topics") {
    const ConnectorConfig cfg = make_config();
    bus::Bus bus;
    Capture readings;
    readings.attach(bus, "meterhub/readings/#");
    Capture dead;
    dead.attach(bus, "meterhub/deadletter/#");

    RawUplink up;
    up.technology = Technology::lorawan;
    up.device_id = "heat-1";
    up.payload = codec::encode_mbus(12345678, 0x04, {{0x0C, 0x06, 12345}});
    up.received_at = 1704067200;
    up.link.rssi_dbm = -114.0;

    auto result = dispatch(up, cfg, bus);
    CHECK(!result.dead_letter_reason.has_value());
    REQUIRE(result.published.size() == 1);
    const MeterReading& r = result.published[0];
    CHECK(r.device_id == "heat-1");
    CHECK(r.value == 12345000.0);
    CHECK(r.timestamp == 1704067200);

    REQUIRE(readings.topics.size() == 1);
    CHECK(readings.topics[0] == "meterhub/readings/lorawan/heat-1");
    CHECK(readings.docs[0]["value"] == 12345000.0);
    CHECK(dead.topics.empty());

    // multi-record frame fans out to one reading per record
    up.payload = codec::encode_mbus(
        12345678, 0x04, {{0x0C, 0x06, 42}, {0x04, 0x13, 500}});
    result = dispatch(up, cfg, bus);
    CHECK(result.published.size() == 2);
    CHECK(readings.topics.size() == 3);
}

TEST_CASE("dispatch fills the configured medium for medium-less codecs") {
    const ConnectorConfig cfg = make_config();
    bus::Bus bus;

    RawUplink up;
    up.technology = Technology::sigfox;
    up.device_id = "gas-2";
    up.payload = codec::encode_pulse(300);
    up.received_at = 1704067200;

    auto result = dispatch(up, cfg, bus);
    REQUIRE(result.published.size() == 1);
    CHECK(result.published[0].medium == Medium::gas);  // from config
    CHECK(result.published[0].value == doctest::Approx(3.0));
    CHECK(result.published[0].unit == Unit::m3);

    // compact device without expected_medium keeps the wire medium
    RawUplink cup;
    cup.technology = Technology::wisun;
    cup.device_id = "water-4";
    codec::DecodedRecord rec;
    rec.medium = Medium::water;
    rec.quantity = Quantity::volume;
    rec.unit = Unit::m3;
    rec.value = 17.25;
    cup.payload = codec::encode_compact(rec).value();
    cup.received_at = 1704067200;
    result = dispatch(cup, cfg, bus);
    REQUIRE(result.published.size() == 1);
    CHECK(result.published[0].medium == Medium::water);
}

TEST_CASE("dispatch dead-letters anything that cannot become a reading") {
    const ConnectorConfig cfg = make_config();
    bus::Bus bus;
    Capture dead;
    dead.attach(bus, "meterhub/deadletter/#");
    Capture readings;
    readings.attach(bus, "meterhub/readings/#");

    RawUplink up;
    up.technology = Technology::lorawan;
    up.device_id = "ghost";
    up.payload = {0x01};
    up.received_at = 1704067200;
    auto result = dispatch(up, cfg, bus);
    CHECK(result.published.empty());
    CHECK(result.dead_letter_reason == "unregistered device");

    up.device_id = "heat-1";
    up.payload = {};
    CHECK(dispatch(up, cfg, bus).dead_letter_reason == "empty payload");

    up.payload = {0x68, 0x00};
    CHECK(dispatch(up, cfg, bus).dead_letter_reason == "truncated frame");

    // SML body whose rows all carry unsupported units
    codec::SmlValue v;
    v.obis = {0x01, 0x00, 0x01, 0x08, 0x00, 0xFF};
    v.unit_code = 0x21;
    v.value = 5;
    RawUplink sml_up;
    sml_up.technology = Technology::nbiot;
    sml_up.device_id = "elec-3";
    sml_up.payload = codec::encode_sml({v});
    sml_up.received_at = 1704067200;
    CHECK(dispatch(sml_up, cfg, bus).dead_letter_reason ==
          "no decodable records");

    // a malformed timestamp survives decode but fails validation
    RawUplink late;
    late.technology = Technology::sigfox;
    late.device_id = "gas-2";
    late.payload = codec::encode_pulse(1);
    late.received_at = -5;
    auto bad_time = dispatch(late, cfg, bus);
    CHECK(bad_time.published.empty());
    CHECK(bad_time.dead_letter_reason ==
          "invalid reading: malformed timestamp;");

    REQUIRE(dead.topics.size() == 5);
    CHECK(dead.topics[0] == "meterhub/deadletter/lorawan");
    CHECK(dead.topics[3] == "meterhub/deadletter/nbiot");
    CHECK(dead.topics[4] == "meterhub/deadletter/sigfox");
    const json& first = dead.docs[0];
    CHECK(first["device_id"] == "ghost");
    CHECK(first["technology"] == "lorawan");
    CHECK(first["reason"] == "unregistered device");
    CHECK(first["raw"] == "01");
    CHECK(first["received_at"] == "2024-01-01T00:00:00Z");
    CHECK(readings.topics.empty());
}

TEST_CASE("dispatch honours strict_crc") {
    ConnectorConfig cfg = make_config();
    bus::Bus bus;

    codec::SmlValue v;
    v.obis = {0x01, 0x00, 0x01, 0x08, 0x00, 0xFF};
    v.unit_code = 0x1E;
    v.scaler = -1;
    v.value = 123456;
    Bytes corrupted = codec::encode_sml({v});
    corrupted.back() ^= 0xFF;

    RawUplink up;
    up.technology = Technology::nbiot;
    up.device_id = "elec-3";
    up.payload = corrupted;
    up.received_at = 1704067200;

    auto lenient = dispatch(up, cfg, bus);
    CHECK(lenient.published.size() == 1);  // decoded, CRC flagged only

    cfg.strict_crc = true;
    auto strict = dispatch(up, cfg, bus);
    CHECK(strict.published.empty());
    CHECK(strict.dead_letter_reason == "CRC mismatch");
}

TEST_CASE("service wires ingest, bus and store together over HTTP") {
    TempDir dir;
    ServiceOptions opts;
    opts.config = make_config();
    opts.config.store_root = (dir.path / "store").string();
    opts.start_bridge = false;
    auto service = Service::create(std::move(opts));
    REQUIRE(service.ok());
    Service& svc = *service.value();

    HttpApi api(svc);
    REQUIRE(api.start("127.0.0.1", 0).ok());
    httplib::Client client("127.0.0.1", api.port());

    // sigfox pulse uplink lands in the store
    json sigfox{{"device", "gas-2"},
                {"time", 1704067200},
                {"data", "010000012c"},
                {"rssi", -126}};
    auto res = client.Post("/ingest/sigfox", sigfox.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body) == json{{"published", 1}});
    CHECK(svc.readings().count() == 1);

    // lorawan TTN envelope
    const Bytes frame =
        codec::encode_mbus(12345678, 0x04, {{0x0C, 0x06, 12345}});
    json env = ttn_envelope("heat-1", to_base64(frame),
                            json::array({{{"rssi", -114}, {"snr", 7.5}}}));
    res = client.Post("/ingest/lorawan", env.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["published"] == 1);
    CHECK(svc.readings().count() == 2);

    // error statuses
    res = client.Post("/ingest/sigfox", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"] == "malformed JSON");

    json oversize = sigfox;
    oversize["data"] = std::string(26, 'a');
    res = client.Post("/ingest/sigfox", oversize.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(json::parse(res->body)["error"] == "payload cap");

    json unknown = sigfox;
    unknown["device"] = "ghost";
    res = client.Post("/ingest/sigfox", unknown.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);  // accepted, but dead-lettered
    CHECK(json::parse(res->body)["dead_letter"] == "unregistered device");
    CHECK(json::parse(res->body)["published"] == 0);

    // read API
    res = client.Get("/devices/gas-2/readings");
    REQUIRE(res);
    CHECK(res->status == 200);
    json rows = json::parse(res->body);
    REQUIRE(rows.is_array());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["device_id"] == "gas-2");
    CHECK(rows[0]["value"] == 3.0);
    CHECK(rows[0]["unit"] == "m3");

    res = client.Get("/devices/gas-2/readings?from=1704067200&to=1704067201");
    REQUIRE(res);
    CHECK(json::parse(res->body).size() == 1);
    res = client.Get("/devices/gas-2/readings?from=1704067201&to=1704070000");
    REQUIRE(res);
    CHECK(json::parse(res->body).empty());
    res = client.Get(
        "/devices/gas-2/readings?from=2024-01-01T00:00:00Z"
        "&to=2024-01-01T01:00:00Z");
    REQUIRE(res);
    CHECK(json::parse(res->body).size() == 1);  // ISO bounds accepted

    res = client.Get("/devices/gas-2/readings?from=banana");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = client.Get("/devices/gas-2/readings?bucket=0");
    REQUIRE(res);
    CHECK(res->status == 400);

    res = client.Get("/devices/gas-2/latest");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["value"] == 3.0);
    res = client.Get("/devices/nobody/latest");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"] == "no readings");

    api.stop();
}

TEST_CASE("service routes NB-IoT and Wi-SUN uplinks off the bus") {
    TempDir dir;
    ServiceOptions opts;
    opts.config = make_config();
    opts.config.store_root = (dir.path / "store").string();
    opts.start_bridge = false;
    auto service = Service::create(std::move(opts));
    REQUIRE(service.ok());
    Service& svc = *service.value();

    Capture dead;
    dead.attach(svc.hub(), "meterhub/deadletter/#");

    codec::SmlValue v;
    v.obis = {0x01, 0x00, 0x01, 0x08, 0x00, 0xFF};
    v.unit_code = 0x1E;
    v.scaler = -1;
    v.value = 123456;
    json doc{{"imei", "elec-3"},
             {"payload", to_hex(codec::encode_sml({v}))},
             {"sent_at", 1704067200},
             {"rssi_dbm", -97.0}};
    svc.deliver(Technology::nbiot, "elec-3", doc);
    CHECK(svc.readings().count() == 1);
    auto latest = svc.readings().latest("elec-3");
    REQUIRE(latest.has_value());
    CHECK(latest->reading.value == doctest::Approx(12345.6));
    CHECK(latest->reading.technology == Technology::nbiot);

    // wisun shares the document shape on its own topic
    codec::DecodedRecord rec;
    rec.medium = Medium::water;
    rec.quantity = Quantity::volume;
    rec.unit = Unit::m3;
    rec.value = 9.5;
    json wdoc{{"imei", "water-4"},
              {"payload", to_hex(codec::encode_compact(rec).value())},
              {"sent_at", 1704067260}};
    svc.hub().publish("meterhub/ingest/wisun/water-4", wdoc.dump());
    CHECK(svc.readings().count() == 2);
    CHECK(svc.readings().latest("water-4")->reading.value == 9.5);

    // malformed document on the ingest topic dead-letters
    svc.hub().publish("meterhub/ingest/nbiot/elec-3", std::string("{bad"));
    REQUIRE(dead.topics.size() == 1);
    CHECK(dead.topics[0] == "meterhub/deadletter/nbiot");
    CHECK(dead.docs[0]["reason"] == "malformed ingest document");
    CHECK(svc.readings().count() == 2);
}

TEST_CASE("http api reports a busy port") {
    TempDir dir;
    ServiceOptions opts;
    opts.config = make_config();
    opts.config.store_root = (dir.path / "store").string();
    opts.start_bridge = false;
    auto service = Service::create(std::move(opts));
    REQUIRE(service.ok());

    HttpApi first(*service.value());
    REQUIRE(first.start("127.0.0.1", 0).ok());
    HttpApi second(*service.value());
    auto clash = second.start("127.0.0.1", first.port());
    REQUIRE(!clash.ok());
    CHECK(clash.error() == "port busy");
    first.stop();
}
