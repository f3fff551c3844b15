int average_temperature(int count);
void calibrate_sensor(int reference);
void show_value(const char *label, int value);
void dim_display(int level);

int main(void) {
  int temperature;
  int night = 0;
  calibrate_sensor(30);
  temperature = average_temperature(4);
  show_value("temp", temperature);
  if (night) {
    dim_display(1);
  }
  return 0;
}
