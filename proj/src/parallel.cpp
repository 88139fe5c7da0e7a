#include "djsr/parallel.hpp"

#include <cstdlib>
#include <string>

namespace djsr {

int default_thread_count() {
    if (const char* env = std::getenv("DJSR_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace djsr
