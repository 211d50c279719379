#include "pedscan/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace pedscan {

unsigned worker_count()
{
    unsigned requested = 0;
    if (const char* env = std::getenv("PEDSCAN_THREADS")) {
        std::string_view text(env);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), requested);
        if (ec != std::errc{}) requested = 0;
    }
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return requested;
}

}  // namespace pedscan
