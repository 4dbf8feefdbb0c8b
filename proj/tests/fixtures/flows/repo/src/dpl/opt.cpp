namespace dpl {

int global_swap(int max_disp = 64) {
  return max_disp;
}

}
