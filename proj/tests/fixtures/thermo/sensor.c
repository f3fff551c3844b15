#include <stdio.h>

/* offset applied to every raw reading */
static int sensor_offset = 3;

int read_sensor(int channel) {
  int raw = channel * 10;
  raw = raw + sensor_offset;
  return raw;
}

void calibrate_sensor(int reference) {
  sensor_offset = reference - read_sensor(0);
}

int average_temperature(int count) {
  int total = 0;
  int i;
  for (i = 0; i < count; i++) {
    total += read_sensor(i);
  }
  if (count == 0)
    return 0;
  return total / count;
}
