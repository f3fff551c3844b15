int next_counter(int counter);

void tick(void) {
  int counter = 0;
  counter = next_counter(counter);
}
