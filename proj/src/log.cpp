#include "mrqm/log.hpp"

#include <iostream>
#include <mutex>

namespace mrqm {

namespace {

std::mutex sink_mutex;

WarningSink& sink() {
    static WarningSink s = [](std::string_view message) { std::cerr << "warning: " << message << '\n'; };
    return s;
}

} // namespace

WarningSink set_warning_sink(WarningSink next) {
    std::lock_guard lock(sink_mutex);
    std::swap(sink(), next);
    return next;
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex);
    if (sink()) sink()(message);
}

} // namespace mrqm
