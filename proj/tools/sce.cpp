#include <cstdio>

int main() {
  std::puts("sce: not wired up yet");
  return 0;
}
