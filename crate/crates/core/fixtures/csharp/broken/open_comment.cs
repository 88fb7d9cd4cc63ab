// expect: UnterminatedComment
using UnityEngine;

public class Sleeper : MonoBehaviour
{
    /* TODO: wake up
    private void Start()
    {
    }
}
