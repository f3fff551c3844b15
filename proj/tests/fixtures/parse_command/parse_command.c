void parse_command(char* input) {
  void *axis_command = NULL;
  if(!input) return;
    /* mm -> inches */
    unit = parse_unit(input);
    axis_command =
      parse_axis_command(input);
  if (mode) {
    move_x(axis_command);
    move_y(axis_command);
  } else if (input) {
    coolant();
#   define FAIL UNSUPPORTED_COMMAND
  if (axis_command)
    do_command(mode);
  }

}
