#include "kitaev/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace kitaev {

int default_workers() {
    if (const char* env = std::getenv("KITAEV_LAB_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace kitaev
