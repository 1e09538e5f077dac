#include "cbas/cbas.h"
int main() { return 0; }
