#include <cstdio>

int main() {
    std::puts("flatknot: command-line interface not wired up yet");
    return 64;
}
