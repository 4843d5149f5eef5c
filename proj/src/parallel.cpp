#include "hwiener/parallel.hpp"

#include <thread>

namespace hwiener {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_engine(const RngStreamSpec& spec) {
  return Engine(splitmix64(spec.master_seed ^ splitmix64(spec.stream_id + 0x632be59bd9b4e019ULL)));
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace hwiener
