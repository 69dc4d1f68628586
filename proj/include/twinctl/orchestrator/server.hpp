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

#pragma once

#include <memory>
#include <string>

#include "twinctl/orchestrator/session.hpp"

namespace twinctl::orch {

inline constexpr const char* kApiSchema = "twinctl.api.v1";

struct ServerOptions {
    SessionConfig defaults;    // POST /sessions bodies are merged over this
    double pace = 10.0;        // simulated seconds per wall second; 0 = as fast as possible
    int top = 5;               // predicted transients returned by /recommendation unless ?top= is given
};

/// JSON over HTTP plus a server-sent event stream, all under /api/v1.
///
///   POST   /sessions                      create (body: partial session config, optional "pace")
///   GET    /sessions/{id}                 phase, time, latest sample
///   GET    /sessions/{id}/recommendation  ranked candidates, reward grid, predicted transients
///   POST   /sessions/{id}/decision        {"action", "candidate"?, "idempotency_key"?}
///   GET    /sessions/{id}/discrepancy     check reports so far
///   GET    /sessions/{id}/transcript      full SessionResult
///   GET    /sessions/{id}/events          text/event-stream: sample, phase, recommendation, ...
///   DELETE /sessions/{id}                 stop and forget
///   GET    /health
class ApiServer {
public:
    /// `assets` serve every session whose config keeps the default model paths.
    ApiServer(ServerOptions options, Assets assets);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds host:port (port 0 picks a free one) and serves on a background
    /// thread. Returns the bound port; throws IoError when binding fails.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from elsewhere.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// "host:port" → pair; throws InvalidSpec.
[[nodiscard]] std::pair<std::string, int> parse_bind(const std::string& text);

} // namespace twinctl::orch
