#pragma once

#include <iostream>
#include <mutex>
#include <ostream>

#include "thematic/core/clock.hpp"
#include "thematic/core/model.hpp"

namespace thematic::service {

/// One JSON object per line.
class Logger {
public:
    explicit Logger(std::ostream* sink = &std::cerr) : sink_(sink) {}

    void log(std::string_view level, std::string_view event, json fields = json::object()) {
        if (!sink_) return;
        fields["level"] = level;
        fields["event"] = event;
        fields["ts"] = clock_.now();
        std::lock_guard lock(mu_);
        *sink_ << fields.dump() << '\n';
        sink_->flush();
    }

    void info(std::string_view event, json fields = json::object()) { log("info", event, std::move(fields)); }
    void warn(std::string_view event, json fields = json::object()) { log("warn", event, std::move(fields)); }
    void error(std::string_view event, json fields = json::object()) { log("error", event, std::move(fields)); }

private:
    std::ostream* sink_;
    std::mutex mu_;
    SystemClock clock_;
};

}  // namespace thematic::service
