int depth(int a, int b, int c) {
  int total = 0;
  if (a > 0) {
    while (b > 0) {
      for (c = 0; c < 3; c++) {
        total = total + c;
      }
      b--;
    }
  }
  return 0;
}
