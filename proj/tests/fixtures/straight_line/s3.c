int clamp(int v);

int straight_three(int p, int q) {
  int r = clamp(p);
  int s = clamp(q + r);
  r = s - p;
  s = r * q;
  q = s + r;
  p = q - s;
  return clamp(p + q + r + s);
}
