// Copyright 2026 The twinctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "twinctl/orchestrator/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "twinctl/common/error.hpp"

namespace twinctl::orch {

namespace {

using nlohmann::json;

json transient_payload(const Transient& tr)
{
    json cols = json::object();
    for (std::size_t c = 0; c < tr.names.size(); ++c) cols[tr.names[c]] = tr.columns[c];
    return {{"time", tr.time}, {"columns", cols}};
}

json sample_payload(const Sample& s)
{
    json sensors = json::object();
    json diag = json::object();
    for (const auto& [n, v] : s.sensors) sensors[n] = v;
    for (const auto& [n, v] : s.diagnosed) diag[n] = v;
    return {{"t", s.t}, {"sensors", sensors}, {"diagnosed", diag}};
}

struct Message {
    std::string event;
    json data;
};

/// One live session: the worker thread owns stepping, requests lock `mu`.
struct Handle {
    std::string id;
    std::mutex mu;
    std::condition_variable cv; // decisions, new messages, shutdown
    std::unique_ptr<Session> session;
    std::vector<Message> messages;
    std::size_t events_sent = 0;
    std::size_t samples_sent = 0;
    std::map<std::string, std::pair<int, json>> replies; // idempotency key → recorded outcome
    bool stopping = false;
    double pace = 10.0;
    std::thread worker;

    // caller holds mu
    void publish()
    {
        const auto& ev = session->events();
        for (; events_sent < ev.size(); ++events_sent) {
            const auto& e = ev[events_sent];
            messages.push_back({e.kind, {{"t", e.t}, {"data", e.data}}});
        }
        const auto& ss = session->samples();
        for (; samples_sent < ss.size(); ++samples_sent) {
            messages.push_back({"sample", sample_payload(ss[samples_sent])});
        }
        cv.notify_all();
    }

    void run()
    {
        std::unique_lock lock(mu);
        publish();
        while (!stopping && !is_terminal(session->phase())) {
            const bool advanced = session->step();
            publish();
            if (!advanced) {
                if (session->phase() == Phase::AwaitingDecision) {
                    cv.wait(lock, [&] { return stopping || session->phase() != Phase::AwaitingDecision; });
                }
                continue;
            }
            if (pace > 0.0) {
                const auto delay = std::chrono::duration<double>(session->config().cadence / pace);
                cv.wait_for(lock, delay, [&] { return stopping; });
            }
        }
        cv.notify_all();
    }
};

void reply(httplib::Response& res, int status, const json& body)
{
    json b = body;
    if (b.is_object() && !b.contains("schema")) b["schema"] = kApiSchema;
    res.status = status;
    res.set_content(b.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& kind, const std::string& message)
{
    reply(res, status, {{"error", kind}, {"message", message}});
}

json state_payload(const Handle& h)
{
    const auto& s = *h.session;
    json j{{"id", h.id}, {"phase", to_string(s.phase())}, {"time", s.time()}, {"events", s.events().size()}};
    j["sample"] = s.samples().empty() ? json(nullptr) : sample_payload(s.samples().back());
    j["awaiting_decision"] = s.phase() == Phase::AwaitingDecision;
    const auto& r = s.result();
    j["decision"] = r.decision ? r.decision->to_json() : json(nullptr);
    j["scram_reason"] = r.scram_reason;
    return j;
}

json recommendation_payload(const Session& s, std::size_t top)
{
    const auto& rec = *s.result().recommendation;
    json ranked = json::array();
    for (const auto& rc : rec.ranked) {
        ranked.push_back({{"index", rc.index},
                          {"tau2_end", rc.strategy.tau2_end},
                          {"t_trip", rc.strategy.t_trip},
                          {"t2_end", rc.strategy.t2_end},
                          {"reward", {{"pfcl", rc.rewards.pfcl},
                                      {"power", rc.rewards.power},
                                      {"torque", rc.rewards.torque},
                                      {"total", rc.rewards.total}}}});
    }
    json predicted = json::array();
    for (std::size_t i = 0; i < rec.ranked.size() && i < top; ++i) {
        const auto idx = rec.ranked[i].index;
        predicted.push_back({{"index", idx}, {"transient", transient_payload(s.predictions()[idx].transient)}});
    }
    return {{"t_rcmd", rec.t_rcmd},
            {"chosen", rec.chosen},
            {"ranked", ranked},
            {"grid", {{"tau2_end", rec.grid.tau2_end}, {"t_trip", rec.grid.t_trip}, {"total", rec.grid.total}}},
            {"predicted", predicted}};
}

} // namespace

std::pair<std::string, int> parse_bind(const std::string& text)
{
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw InvalidSpec("bind address must look like host:port, got '" + text + "'");
    }
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw InvalidSpec("bad port in '" + text + "'");
    }
    if (port < 0 || port > 65535) throw InvalidSpec("port out of range in '" + text + "'");
    return {text.substr(0, colon), port};
}

struct ApiServer::Impl {
    ServerOptions options;
    Assets assets;
    httplib::Server http;
    std::thread listener;
    std::mutex mu; // sessions map
    std::map<std::string, std::shared_ptr<Handle>> sessions;
    std::uint64_t next_id = 1;
    std::atomic<bool> stopped{false};

    std::shared_ptr<Handle> find(const std::string& id)
    {
        std::lock_guard lock(mu);
        const auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    static void halt(Handle& h)
    {
        {
            std::lock_guard lock(h.mu);
            h.stopping = true;
        }
        h.cv.notify_all();
        if (h.worker.joinable()) h.worker.join();
    }

    void create(const httplib::Request& req, httplib::Response& res)
    {
        json body = json::object();
        if (!req.body.empty()) {
            body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) return fail(res, 400, "ParseError", "body must be a JSON object");
        }
        double pace = options.pace;
        if (body.contains("pace")) {
            if (!body["pace"].is_number() || body["pace"].get<double>() < 0.0) {
                return fail(res, 400, "InvalidSpec", "pace must be a number >= 0");
            }
            pace = body["pace"].get<double>();
            body.erase("pace");
        }
        SessionConfig cfg;
        Assets a = assets;
        try {
            cfg = session_config_from_json(body, options.defaults);
            if (cfg.dtd_model != options.defaults.dtd_model || cfg.dtp_model != options.defaults.dtp_model ||
                cfg.reference_table != options.defaults.reference_table || !a.dtd) {
                a = Assets::load(cfg);
            }
        } catch (const ParseError& e) {
            return fail(res, 400, "ParseError", e.what());
        } catch (const InvalidSpec& e) {
            return fail(res, 400, "InvalidSpec", e.what());
        } catch (const Error& e) {
            return fail(res, 422, "ModelLoadError", e.what());
        }
        auto h = std::make_shared<Handle>();
        h->pace = pace;
        {
            std::lock_guard lock(mu);
            h->id = "s" + std::to_string(next_id++);
            sessions[h->id] = h;
        }
        {
            std::lock_guard lock(h->mu);
            h->session = std::make_unique<Session>(cfg, a);
            h->publish();
            reply(res, 201, state_payload(*h));
        }
        h->worker = std::thread([h] { h->run(); });
    }

    void decide(const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res)
    {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return fail(res, 400, "InvalidDecision", "body must be a JSON object");
        std::string key;
        if (body.contains("idempotency_key")) {
            if (!body["idempotency_key"].is_string()) {
                return fail(res, 400, "InvalidDecision", "idempotency_key must be a string");
            }
            key = body["idempotency_key"].get<std::string>();
        }
        std::lock_guard lock(h->mu);
        if (!key.empty()) {
            const auto it = h->replies.find(key);
            if (it != h->replies.end()) {
                json replay = it->second.second;
                replay["replayed"] = true;
                return reply(res, it->second.first, replay);
            }
        }
        int status = 200;
        json out;
        try {
            json d = body;
            d.erase("idempotency_key");
            h->session->decide(Decision::from_json(d));
            out = state_payload(*h);
        } catch (const InvalidDecision& e) {
            status = 400;
            out = {{"error", "InvalidDecision"}, {"message", e.what()}};
        } catch (const PhaseConflict& e) {
            status = 409;
            out = {{"error", "PhaseConflict"}, {"message", e.what()},
                   {"phase", to_string(h->session->phase())}};
        }
        out["schema"] = kApiSchema;
        // only outcomes that changed the session are pinned to the key
        if (!key.empty() && status == 200) h->replies[key] = {status, out};
        h->publish();
        reply(res, status, out);
    }

    void stream(const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res)
    {
        std::size_t start = 0;
        if (req.has_header("Last-Event-ID")) {
            try {
                start = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
            } catch (const std::exception&) {
                start = 0;
            }
        }
        auto cursor = std::make_shared<std::size_t>(start);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, h, cursor](std::size_t, httplib::DataSink& sink) {
            std::unique_lock lock(h->mu);
            h->cv.wait_for(lock, std::chrono::milliseconds(500), [&] {
                return *cursor < h->messages.size() || h->stopping || stopped || is_terminal(h->session->phase());
            });
            std::string chunk;
            for (; *cursor < h->messages.size(); ++*cursor) {
                const auto& m = h->messages[*cursor];
                chunk += "id: " + std::to_string(*cursor) + "\nevent: " + m.event + "\ndata: " + m.data.dump() + "\n\n";
            }
            const bool done = h->stopping || stopped || is_terminal(h->session->phase());
            lock.unlock();
            if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
            if (done) {
                sink.done();
            } else if (chunk.empty() && !sink.is_writable()) {
                return false;
            }
            return true;
        });
    }

    void routes()
    {
        const std::string base = "/api/v1";
        http.Get(base + "/health", [](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, {{"status", "ok"}});
        });
        http.Post(base + "/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });

        auto with = [this](auto fn) {
            return [this, fn](const httplib::Request& req, httplib::Response& res) {
                const auto h = find(req.path_params.at("id"));
                if (!h) return fail(res, 404, "NotFound", "unknown session '" + req.path_params.at("id") + "'");
                fn(h, req, res);
            };
        };
        http.Get(base + "/sessions/:id", with([](const std::shared_ptr<Handle>& h, const httplib::Request&,
                                                 httplib::Response& res) {
                     std::lock_guard lock(h->mu);
                     reply(res, 200, state_payload(*h));
                 }));
        http.Get(base + "/sessions/:id/recommendation",
                 with([this](const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res) {
                     std::size_t top = static_cast<std::size_t>(options.top);
                     if (req.has_param("top")) {
                         try {
                             top = std::stoul(req.get_param_value("top"));
                         } catch (const std::exception&) {
                             return fail(res, 400, "InvalidSpec", "top must be a non-negative integer");
                         }
                     }
                     std::lock_guard lock(h->mu);
                     if (!h->session->result().recommendation) {
                         return fail(res, 409, "PhaseConflict", std::string("no recommendation yet in phase ") +
                                                                    to_string(h->session->phase()));
                     }
                     reply(res, 200, recommendation_payload(*h->session, top));
                 }));
        http.Post(base + "/sessions/:id/decision",
                  with([this](const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res) {
                      decide(h, req, res);
                  }));
        http.Get(base + "/sessions/:id/discrepancy",
                 with([](const std::shared_ptr<Handle>& h, const httplib::Request&, httplib::Response& res) {
                     std::lock_guard lock(h->mu);
                     json reps = json::array();
                     for (const auto& r : h->session->result().reports) reps.push_back(decision::to_json(r));
                     reply(res, 200, {{"reports", reps}, {"phase", to_string(h->session->phase())}});
                 }));
        http.Get(base + "/sessions/:id/transcript",
                 with([](const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res) {
                     std::size_t top = 10;
                     if (req.has_param("top")) top = std::strtoul(req.get_param_value("top").c_str(), nullptr, 10);
                     std::lock_guard lock(h->mu);
                     reply(res, 200, h->session->result().to_json(top));
                 }));
        http.Get(base + "/sessions/:id/events",
                 with([this](const std::shared_ptr<Handle>& h, const httplib::Request& req, httplib::Response& res) {
                     stream(h, req, res);
                 }));
        http.Delete(base + "/sessions/:id",
                    with([this](const std::shared_ptr<Handle>& h, const httplib::Request&, httplib::Response& res) {
                        halt(*h);
                        {
                            std::lock_guard lock(mu);
                            sessions.erase(h->id);
                        }
                        reply(res, 200, {{"id", h->id}, {"deleted", true}});
                    }));
        http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                fail(res, 500, "Internal", e.what());
            }
        });
    }
};

ApiServer::ApiServer(ServerOptions options, Assets assets) : impl_(std::make_unique<Impl>())
{
    impl_->options = std::move(options);
    impl_->assets = std::move(assets);
    impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->listener = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

void ApiServer::wait()
{
    if (impl_->listener.joinable()) impl_->listener.join();
}

void ApiServer::stop()
{
    if (!impl_ || impl_->stopped.exchange(true)) return;
    std::vector<std::shared_ptr<Handle>> all;
    {
        std::lock_guard lock(impl_->mu);
        for (auto& [id, h] : impl_->sessions) all.push_back(h);
    }
    for (auto& h : all) Impl::halt(*h);
    impl_->http.stop();
    if (impl_->listener.joinable()) impl_->listener.join();
}

} // namespace twinctl::orch
