#include <stdio.h>

#define DISPLAY_WIDTH 16

int display_brightness = 5;

void show_value(const char *label, int value) {
  char line[DISPLAY_WIDTH];
  snprintf(line, DISPLAY_WIDTH, "%s=%d", label, value);
  puts(line);
}

void dim_display(int level) {
  if (level < 0)
    level = 0;
  display_brightness = level;
  show_value("dim", display_brightness);
}
