#pragma once

// Loopback HTTP server with canned registry payloads for fetch tests.

#include <string>
#include <thread>

#include "ixtrace/fetch.hpp"

namespace testsupport {

class MockRegistry {
public:
    MockRegistry() {
        server_.Get("/api/ix", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"data":[
                {"id":1,"name":"Metro-IX","status":"ok"},
                {"id":2,"name":"Harbor-IX","status":"ok"},
                {"id":3,"name":"Sunset-IX","status":"deleted"}
            ]})", "application/json");
        });
        server_.Get("/api/ixpfx", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"data":[
                {"ix_id":1,"protocol":"IPv4","prefix":"195.69.144.0/22"},
                {"ix_id":1,"protocol":"IPv6","prefix":"2001:db8::/32"},
                {"ix_id":9,"protocol":"IPv4","prefix":"81.20.0.0/20"}
            ]})", "application/json");
        });
        server_.Get("/api/netixlan", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"data":[
                {"ix_id":1,"asn":65001,"ipaddr4":"195.69.144.10"},
                {"ix_id":1,"asn":65001,"ipaddr4":"195.69.144.11"},
                {"ix_id":1,"asn":65002,"ipaddr4":null},
                {"ix_id":2,"asn":65003}
            ]})", "application/json");
        });
        server_.Get("/ixps.json", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"([
                {"id":7,"name":"Metro IX","active":true,
                 "prefixes":["195.69.144.0/22"],
                 "members":[{"asn":65001,"ips":["195.69.144.10"]}]},
                {"id":8,"name":"Island-IX","active":false,
                 "prefixes":["146.66.0.0/17"],
                 "members":[]}
            ])", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockRegistry() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace testsupport
